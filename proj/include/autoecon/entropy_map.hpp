#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "autoecon/errors.hpp"
#include "autoecon/kv.hpp"
#include "autoecon/numerics.hpp"

namespace autoecon {

// Coefficients of the fitted accuracy-to-loss map
//
//   H(a, n) = beta0 + beta1 a + beta2 a^2 + beta3 a^3
//           + gamma1 a ln a + gamma2 (1-a) ln(1-a)
//           + delta1 a ln n + delta2 ln n + delta3 / n
//
// in nats. The x ln x terms take their limit value 0 at a = 0 and a = 1.
// The map is only used on its strictly decreasing branch a in (1/n, 1);
// construction verifies that branch is monotone for n in [2, 5000].
struct EntropyFitParams {
  double beta0 = 2.86, beta1 = 14.22, beta2 = -27.10, beta3 = 10.48;
  double gamma1 = 11.99, gamma2 = -1.82;
  double delta1 = -0.70, delta2 = 0.61, delta3 = -0.62;

  std::array<double, 9> as_array() const {
    return {beta0, beta1, beta2, beta3, gamma1, gamma2, delta1, delta2, delta3};
  }
  static EntropyFitParams from_array(const std::array<double, 9>& v) {
    EntropyFitParams p;
    p.beta0 = v[0]; p.beta1 = v[1]; p.beta2 = v[2]; p.beta3 = v[3];
    p.gamma1 = v[4]; p.gamma2 = v[5];
    p.delta1 = v[6]; p.delta2 = v[7]; p.delta3 = v[8];
    return p;
  }
  static const std::array<std::string, 9>& names() {
    static const std::array<std::string, 9> kNames = {
        "beta0",  "beta1",  "beta2",  "beta3", "gamma1",
        "gamma2", "delta1", "delta2", "delta3"};
    return kNames;
  }
};

// Loss (nats) at accuracy a on an n-class task. a in (0, 1], n >= 2.
inline double entropy_from_accuracy(double a, double n,
                                    const EntropyFitParams& p) {
  if (!(a > 0.0) || a > 1.0) {
    throw DomainError("accuracy must lie in (0, 1]");
  }
  if (n < 2.0) throw DomainError("n_class must be at least 2");
  double ln_n = std::log(n);
  double a_ln_a = a * std::log(a);                          // -> 0 at a = 1
  double q = 1.0 - a;
  double q_ln_q = q > 0.0 ? q * std::log(q) : 0.0;          // -> 0 at a = 1
  return p.beta0 + p.beta1 * a + p.beta2 * a * a + p.beta3 * a * a * a +
         p.gamma1 * a_ln_a + p.gamma2 * q_ln_q + p.delta1 * a * ln_n +
         p.delta2 * ln_n + p.delta3 / n;
}

// Derivative of entropy_from_accuracy in a, for a in (0, 1).
inline double entropy_slope(double a, double n, const EntropyFitParams& p) {
  double ln_n = std::log(n);
  return p.beta1 + 2.0 * p.beta2 * a + 3.0 * p.beta3 * a * a +
         p.gamma1 * (std::log(a) + 1.0) - p.gamma2 * (std::log(1.0 - a) + 1.0) +
         p.delta1 * ln_n;
}

// Checks that a -> H(a, n) strictly decreases on (1/n, 1) across the
// supported class-count range. Throws DomainError if not.
inline void validate_entropy_params(const EntropyFitParams& p,
                                    double n_min = 2.0, double n_max = 5000.0) {
  const int kNGrid = 24, kAGrid = 400;
  for (int i = 0; i < kNGrid; ++i) {
    double n = n_min * std::exp(std::log(n_max / n_min) * i / (kNGrid - 1));
    double a_lo = 1.0 / n;
    for (int j = 0; j < kAGrid; ++j) {
      double a = a_lo + (1.0 - 1e-9 - a_lo) * (j + 0.5) / kAGrid;
      if (entropy_slope(a, n, p) >= 0.0) {
        throw DomainError("accuracy-to-loss map is not strictly decreasing "
                          "on (1/n, 1) at n = " + std::to_string(n));
      }
    }
  }
}

// EntropyFitParams carrying a construction-time monotonicity guarantee.
class ValidatedEntropyParams {
 public:
  explicit ValidatedEntropyParams(const EntropyFitParams& p = {}) : params_(p) {
    validate_entropy_params(p);
  }
  const EntropyFitParams& get() const { return params_; }

 private:
  EntropyFitParams params_;
};

namespace detail {
constexpr double kAccuracyEdge = 1e-6;  // margin at both ends of the branch
}

// Inverse of entropy_from_accuracy on the decreasing branch. h must lie in
// [H(1 - 1e-6, n), H(1/n + 1e-6, n)].
inline double accuracy_from_entropy(double h, double n,
                                    const EntropyFitParams& p) {
  if (n < 2.0) throw DomainError("n_class must be at least 2");
  double a_lo = 1.0 / n + detail::kAccuracyEdge;
  double a_hi = 1.0 - detail::kAccuracyEdge;
  double h_min = entropy_from_accuracy(a_hi, n, p);
  double h_max = entropy_from_accuracy(a_lo, n, p);
  if (h < h_min || h > h_max) {
    throw OutOfRangeError("loss outside the invertible accuracy bracket");
  }
  double a = bisect_root(
      [&](double x) { return entropy_from_accuracy(x, n, p) - h; }, a_lo, a_hi);
  return a;
}

// Baseline loss of performing the task with no information: the better of
// the surveyed random-guess accuracy and uniform 1/n guessing.
inline double task_entropy(double random_guess_error, double n,
                           const EntropyFitParams& p) {
  if (random_guess_error < 0.0 || random_guess_error >= 1.0) {
    throw DomainError("random_guess_error must lie in [0, 1)");
  }
  double h_guess = entropy_from_accuracy(1.0 - random_guess_error, n, p);
  double h_uniform = entropy_from_accuracy(1.0 / n, n, p);
  return std::min(h_guess, h_uniform);
}

// Per-subtask accuracy needed so that m independent subtasks jointly meet a
// task-level accuracy target: 1 - a = (1 - a_task) / m.
inline double required_accuracy_per_subtask(double task_accuracy, double m) {
  if (m < 1.0) throw DomainError("subtask count must be at least 1");
  if (!(task_accuracy > 0.0) || task_accuracy > 1.0) {
    throw DomainError("required accuracy must lie in (0, 1]");
  }
  return 1.0 - (1.0 - task_accuracy) / m;
}

// Required accuracy and baseline-error data for one task.
struct AccuracySpec {
  double required_accuracy;    // task-level, in (0, 1]
  double random_guess_error;   // in [0, 1)
  double n_class;              // >= 2
  double num_subtasks = 1.0;   // >= 1

  void validate() const {
    if (!(required_accuracy > 0.0) || required_accuracy > 1.0) {
      throw DomainError("required accuracy must lie in (0, 1]");
    }
    if (random_guess_error < 0.0 || random_guess_error >= 1.0) {
      throw DomainError("random_guess_error must lie in [0, 1)");
    }
    if (1.0 - required_accuracy >= random_guess_error) {
      throw DomainError(
          "required error must be smaller than the random-guess error");
    }
    if (n_class < 2.0) throw DomainError("n_class must be at least 2");
    if (num_subtasks < 1.0) throw DomainError("subtask count must be >= 1");
  }
};

// Loss the AI must reach for full substitution: the per-subtask required
// accuracy pushed through the accuracy-to-loss map. Accuracies at or below
// chance are rejected (the map is only used above 1/n).
inline double required_entropy(const AccuracySpec& spec,
                               const EntropyFitParams& p) {
  spec.validate();
  double a_req =
      required_accuracy_per_subtask(spec.required_accuracy, spec.num_subtasks);
  if (a_req <= 1.0 / spec.n_class) {
    throw DomainError("per-subtask required accuracy is at or below chance");
  }
  return entropy_from_accuracy(a_req, spec.n_class, p);
}

inline KeyValueFile entropy_params_to_kv(const EntropyFitParams& p) {
  KeyValueFile kv;
  auto vals = p.as_array();
  const auto& names = EntropyFitParams::names();
  for (std::size_t i = 0; i < names.size(); ++i) kv.set(names[i], vals[i]);
  return kv;
}

inline EntropyFitParams entropy_params_from_kv(const KeyValueFile& kv) {
  std::array<double, 9> vals{};
  const auto& names = EntropyFitParams::names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    vals[i] = kv.get_double(names[i]);
  }
  return EntropyFitParams::from_array(vals);
}

}  // namespace autoecon
