#pragma once

#include <array>
#include <cmath>
#include <string>

#include "autoecon/errors.hpp"
#include "autoecon/kv.hpp"

namespace autoecon {

// Fine-tuning inputs for one n-class task. `data` counts labeled images in
// total (not per class).
struct InputBundle {
  double data = 0.0;
  double steps = 0.0;
  double model_size = 0.0;
  double n_class = 2.0;
};

// Closed intervals, per input axis, over which the fitted loss surface is
// trusted. Matches the calibration grid of the default constants.
struct SupportedRegime {
  double n_min = 2.0, n_max = 5000.0;
  double data_per_class_min = 13.0, data_per_class_max = 1300.0;
  double steps_min = 1e3, steps_max = 1e7;
  double model_min = 7.3e3, model_max = 8.78e7;

  bool contains(const InputBundle& b) const {
    double per_class = b.data / b.n_class;
    return b.n_class >= n_min && b.n_class <= n_max &&
           per_class >= data_per_class_min && per_class <= data_per_class_max &&
           b.steps >= steps_min && b.steps <= steps_max &&
           b.model_size >= model_min && b.model_size <= model_max;
  }
};

enum class RegimePolicy {
  kStrict,       // reject bundles outside the supported regime
  kExtrapolate,  // evaluate anyway; the inner sum gets clamped at a floor
};

// Constants of the complexity-aware loss surface
//
//   loss(D,T,M;n) = exp( ln[ alpha(n)/(D/n)^a(n) + beta(n)/T^b(n)
//                            + sigma(n)/M^c(n) + G ] + K ln n )
//
// with a(n) = a0 + a1 ln n, alpha(n) = exp(A0 + A1 ln n), and likewise for
// the steps (B,b) and model-size (C,c) pairs.
struct ScalingLawParams {
  double A0 = -1.448, A1 = 0.752;
  double a0 = -0.034, a1 = 0.077;
  double B0 = 1.474, B1 = 1.049;
  double b0 = 0.383, b1 = 0.020;
  double C0 = 4.054, C1 = 0.308;
  double c0 = 0.614, c1 = -0.041;
  double G = -0.296;
  double K = -0.150;

  std::array<double, 14> as_array() const {
    return {A0, A1, a0, a1, B0, B1, b0, b1, C0, C1, c0, c1, G, K};
  }
  static ScalingLawParams from_array(const std::array<double, 14>& v) {
    ScalingLawParams p;
    p.A0 = v[0]; p.A1 = v[1]; p.a0 = v[2]; p.a1 = v[3];
    p.B0 = v[4]; p.B1 = v[5]; p.b0 = v[6]; p.b1 = v[7];
    p.C0 = v[8]; p.C1 = v[9]; p.c0 = v[10]; p.c1 = v[11];
    p.G = v[12]; p.K = v[13];
    return p;
  }
  static const std::array<std::string, 14>& names() {
    static const std::array<std::string, 14> kNames = {
        "A0", "A1", "a0", "a1", "B0", "B1", "b0",
        "b1", "C0", "C1", "c0", "c1", "G",  "K"};
    return kNames;
  }
};

// Per-n constants of the surface at a fixed class count.
struct EffectiveConstants {
  double a, b, c;           // positive exponents in the supported regime
  double alpha, beta, sigma;  // numerators paired with (D/n)^a, T^b, M^c
  double n_pow_k;           // n^K outer factor
  // Folds the per-class division into the data numerator, so that
  // alpha_eff / D^a equals alpha / (D/n)^a.
  double alpha_eff;
};

inline EffectiveConstants effective_constants(double n,
                                              const ScalingLawParams& p) {
  EffectiveConstants e;
  double ln_n = std::log(n);
  e.a = p.a0 + p.a1 * ln_n;
  e.b = p.b0 + p.b1 * ln_n;
  e.c = p.c0 + p.c1 * ln_n;
  e.alpha = std::exp(p.A0 + p.A1 * ln_n);
  e.beta = std::exp(p.B0 + p.B1 * ln_n);
  e.sigma = std::exp(p.C0 + p.C1 * ln_n);
  e.n_pow_k = std::exp(p.K * ln_n);
  e.alpha_eff = std::exp(p.A0 + p.A1 * ln_n + e.a * ln_n);
  return e;
}

struct EvalOptions {
  RegimePolicy policy = RegimePolicy::kStrict;
  // Under extrapolation the inner sum is clamped at this floor before the
  // logarithm. Setting it to 0 disables clamping and makes a non-positive
  // sum an error instead.
  double bracket_floor = 1e-9;
};

struct EvalResult {
  double loss = 0.0;
  bool clamped = false;  // inner sum hit the extrapolation floor
};

namespace detail {

inline void check_bundle(const InputBundle& b) {
  if (b.n_class < 2.0) throw DomainError("n_class must be at least 2");
  if (b.data < b.n_class) {
    throw DomainError("data must be at least one image per class");
  }
  if (b.steps < 1.0 || b.model_size < 1.0) {
    throw DomainError("steps and model_size must be at least 1");
  }
}

struct BracketTerms {
  double data_term, steps_term, model_term, bracket;
};

inline BracketTerms bracket_terms(const InputBundle& b,
                                  const EffectiveConstants& e, double G) {
  BracketTerms t;
  t.data_term = e.alpha * std::exp(-e.a * std::log(b.data / b.n_class));
  t.steps_term = e.beta * std::exp(-e.b * std::log(b.steps));
  t.model_term = e.sigma * std::exp(-e.c * std::log(b.model_size));
  t.bracket = t.data_term + t.steps_term + t.model_term + G;
  return t;
}

}  // namespace detail

// Cross-entropy loss (nats) predicted for a fine-tuning input bundle.
inline EvalResult eval_loss_checked(const InputBundle& b,
                                    const ScalingLawParams& p,
                                    const SupportedRegime& regime = {},
                                    const EvalOptions& opt = {}) {
  detail::check_bundle(b);
  if (opt.policy == RegimePolicy::kStrict && !regime.contains(b)) {
    throw OutOfRegimeError("input bundle outside the supported regime");
  }
  EffectiveConstants e = effective_constants(b.n_class, p);
  detail::BracketTerms t = detail::bracket_terms(b, e, p.G);
  EvalResult r;
  double bracket = t.bracket;
  if (bracket <= 0.0) {
    if (opt.policy == RegimePolicy::kExtrapolate && opt.bracket_floor > 0.0) {
      bracket = opt.bracket_floor;
      r.clamped = true;
    } else {
      throw NonPositiveBracketError(
          "scaling-law inner sum is non-positive; logarithm undefined");
    }
  } else if (opt.policy == RegimePolicy::kExtrapolate &&
             opt.bracket_floor > 0.0 && bracket < opt.bracket_floor) {
    bracket = opt.bracket_floor;
    r.clamped = true;
  }
  r.loss = bracket * e.n_pow_k;
  return r;
}

inline double eval_loss(const InputBundle& b, const ScalingLawParams& p,
                        const SupportedRegime& regime = {},
                        const EvalOptions& opt = {}) {
  return eval_loss_checked(b, p, regime, opt).loss;
}

struct LossGradient {
  double d_data, d_steps, d_model;  // all strictly negative in the regime
};

// Analytic partials of eval_loss with respect to D, T, M.
inline LossGradient loss_gradient(const InputBundle& b,
                                  const ScalingLawParams& p,
                                  const SupportedRegime& regime = {},
                                  const EvalOptions& opt = {}) {
  detail::check_bundle(b);
  if (opt.policy == RegimePolicy::kStrict && !regime.contains(b)) {
    throw OutOfRegimeError("input bundle outside the supported regime");
  }
  EffectiveConstants e = effective_constants(b.n_class, p);
  detail::BracketTerms t = detail::bracket_terms(b, e, p.G);
  if (t.bracket <= 0.0) {
    throw NonPositiveBracketError(
        "scaling-law inner sum is non-positive; gradient undefined");
  }
  LossGradient g;
  g.d_data = e.n_pow_k * (-e.a / b.data) * t.data_term;
  g.d_steps = e.n_pow_k * (-e.b / b.steps) * t.steps_term;
  g.d_model = e.n_pow_k * (-e.c / b.model_size) * t.model_term;
  return g;
}

struct PerformanceElasticities {
  double data, steps, model;
  double total() const { return data + steps + model; }
};

// Elasticities of the gap between the task baseline loss and the model loss
// with respect to each input: eps_x = (-d loss / d ln x) / (h_task - loss).
// Requires the model to beat the baseline at the given bundle.
inline PerformanceElasticities performance_elasticities(
    const InputBundle& b, const ScalingLawParams& p, double h_task,
    const SupportedRegime& regime = {}, const EvalOptions& opt = {}) {
  double loss = eval_loss(b, p, regime, opt);
  if (h_task <= loss) {
    throw BaselineNotExceededError(
        "task baseline loss does not exceed the model loss");
  }
  LossGradient g = loss_gradient(b, p, regime, opt);
  double gap = h_task - loss;
  PerformanceElasticities e;
  e.data = -b.data * g.d_data / gap;
  e.steps = -b.steps * g.d_steps / gap;
  e.model = -b.model_size * g.d_model / gap;
  return e;
}

struct SubstitutionElasticities {
  double data_steps, steps_model, data_model;
};

// Pairwise substitution measures published with the loss surface: each is a
// convex combination of (exponent+1) values weighted by x_exp * num * x^exp
// evaluated with the per-n effective constants (per-class data folded into
// the data numerator). Note these are a reciprocal-style convention, not the
// bordered-Hessian Allen-Uzawa values of the same isoquant; the tests keep
// an independent numeric oracle for the latter.
inline SubstitutionElasticities substitution_elasticities(
    const InputBundle& b, const ScalingLawParams& p,
    const SupportedRegime& regime = {}, const EvalOptions& opt = {}) {
  detail::check_bundle(b);
  if (opt.policy == RegimePolicy::kStrict && !regime.contains(b)) {
    throw OutOfRegimeError("input bundle outside the supported regime");
  }
  EffectiveConstants e = effective_constants(b.n_class, p);
  double wd = e.a * e.alpha_eff * std::exp(e.a * std::log(b.data));
  double wt = e.b * e.beta * std::exp(e.b * std::log(b.steps));
  double wm = e.c * e.sigma * std::exp(e.c * std::log(b.model_size));
  SubstitutionElasticities s;
  s.data_steps = ((e.a + 1.0) * wt + (e.b + 1.0) * wd) / (wt + wd);
  s.steps_model = ((e.b + 1.0) * wm + (e.c + 1.0) * wt) / (wm + wt);
  s.data_model = ((e.a + 1.0) * wm + (e.c + 1.0) * wd) / (wm + wd);
  return s;
}

// Key-value serialization of the 14 surface constants, optionally with fit
// quality scores appended.
inline KeyValueFile scaling_params_to_kv(const ScalingLawParams& p) {
  KeyValueFile kv;
  auto vals = p.as_array();
  const auto& names = ScalingLawParams::names();
  for (std::size_t i = 0; i < names.size(); ++i) kv.set(names[i], vals[i]);
  return kv;
}

inline ScalingLawParams scaling_params_from_kv(const KeyValueFile& kv) {
  std::array<double, 14> vals{};
  const auto& names = ScalingLawParams::names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    vals[i] = kv.get_double(names[i]);
  }
  return ScalingLawParams::from_array(vals);
}

}  // namespace autoecon
