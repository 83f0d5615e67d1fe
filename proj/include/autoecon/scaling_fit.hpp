#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>
#include <vector>

#include "autoecon/csv.hpp"
#include "autoecon/errors.hpp"
#include "autoecon/rng.hpp"
#include "autoecon/scaling_law.hpp"

namespace autoecon {

// One measured fine-tuning run: input bundle plus out-of-sample loss.
struct ExperimentObservation {
  InputBundle bundle;
  double loss = 0.0;  // cross-entropy, nats, > 0
};

struct FitOptions {
  int restarts = 20;
  std::uint64_t split_seed = 1;
  double init_sd = 0.316227766016838;  // sqrt(0.1)
  long max_residual_evals = 500000;    // per restart
  int max_iterations = 250;            // per restart
  double test_fraction = 0.20;
  int threads = 0;  // 0 = hardware concurrency
};

struct FitResult {
  ScalingLawParams params;
  double train_r2 = 0.0;
  double test_r2 = 0.0;
  int best_restart = -1;
};

// Deterministic multiplicative-noise observations from a known surface:
// loss = eval_loss * exp(eps), eps ~ Normal(0, noise_sd^2).
inline std::vector<ExperimentObservation> generate_synthetic_observations(
    const ScalingLawParams& params, const std::vector<InputBundle>& design,
    double noise_sd, int replicates, std::uint64_t seed,
    const SupportedRegime& regime = {},
    RegimePolicy policy = RegimePolicy::kStrict) {
  if (design.empty()) throw DomainError("design must be non-empty");
  if (noise_sd < 0.0) throw DomainError("noise_sd must be non-negative");
  if (replicates < 1) throw DomainError("replicates must be at least 1");
  EvalOptions opt;
  opt.policy = policy;
  std::vector<ExperimentObservation> out;
  out.reserve(design.size() * static_cast<std::size_t>(replicates));
  Rng rng(seed);
  for (const InputBundle& b : design) {
    double clean = eval_loss(b, params, regime, opt);
    for (int r = 0; r < replicates; ++r) {
      double eps = noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0;
      out.push_back({b, clean * std::exp(eps)});
    }
  }
  return out;
}

// The calibration grid: 4 class counts x 5 per-class data levels x 4 model
// sizes, with training steps cycled over 5 log-spaced levels so every axis
// varies. 80 configurations.
inline std::vector<InputBundle> default_experiment_design() {
  const double n_levels[] = {2, 10, 100, 500};
  const double per_class[] = {13, 65, 130, 650, 1300};
  const double m_levels[] = {7.3e3, 0.4e6, 28.3e6, 87.8e6};
  const double t_levels[] = {1e3, 1e4, 1e5, 1e6, 1e7};
  std::vector<InputBundle> design;
  design.reserve(80);
  for (int ni = 0; ni < 4; ++ni) {
    for (int di = 0; di < 5; ++di) {
      for (int mi = 0; mi < 4; ++mi) {
        InputBundle b;
        b.n_class = n_levels[ni];
        b.data = per_class[di] * n_levels[ni];
        b.model_size = m_levels[mi];
        b.steps = t_levels[(di + 2 * mi + 3 * ni) % 5];
        design.push_back(b);
      }
    }
  }
  return design;
}

namespace detail {

struct LogLossModel {
  // ln(predicted loss) and its 14 partial derivatives at one bundle.
  // The inner sum is clamped far below any data scale to keep iterates
  // finite; clamped points contribute a steep artificial residual.
  static double eval(const std::array<double, 14>& th, const InputBundle& b,
                     Eigen::Ref<Eigen::VectorXd> grad_out, bool want_grad) {
    const double ln_n = std::log(b.n_class);
    const double ln_dpc = std::log(b.data / b.n_class);
    const double ln_t = std::log(b.steps);
    const double ln_m = std::log(b.model_size);
    const double a = th[2] + th[3] * ln_n;
    const double bb = th[6] + th[7] * ln_n;
    const double c = th[10] + th[11] * ln_n;
    const double td = std::exp(th[0] + th[1] * ln_n - a * ln_dpc);
    const double tt = std::exp(th[4] + th[5] * ln_n - bb * ln_t);
    const double tm = std::exp(th[8] + th[9] * ln_n - c * ln_m);
    double bracket = td + tt + tm + th[12];
    const double kFloor = 1e-12;
    bool clamped = bracket < kFloor;
    if (clamped) bracket = kFloor;
    double val = std::log(bracket) + th[13] * ln_n;
    if (want_grad) {
      double inv = clamped ? 0.0 : 1.0 / bracket;
      grad_out.setZero();
      grad_out[0] = td * inv;
      grad_out[1] = td * inv * ln_n;
      grad_out[2] = -td * inv * ln_dpc;
      grad_out[3] = -td * inv * ln_dpc * ln_n;
      grad_out[4] = tt * inv;
      grad_out[5] = tt * inv * ln_n;
      grad_out[6] = -tt * inv * ln_t;
      grad_out[7] = -tt * inv * ln_t * ln_n;
      grad_out[8] = tm * inv;
      grad_out[9] = tm * inv * ln_n;
      grad_out[10] = -tm * inv * ln_m;
      grad_out[11] = -tm * inv * ln_m * ln_n;
      grad_out[12] = inv;
      grad_out[13] = ln_n;
    }
    return val;
  }
};

struct RestartOutcome {
  std::array<double, 14> theta{};
  double train_r2 = -std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Damped Gauss-Newton on the log-loss residuals from one random start.
inline RestartOutcome fit_one_restart(
    const std::vector<ExperimentObservation>& train, std::uint64_t seed,
    const FitOptions& opt) {
  const int kP = 14;
  const int n = static_cast<int>(train.size());
  Rng rng(seed);
  std::array<double, 14> theta;
  for (auto& t : theta) t = rng.normal(0.0, opt.init_sd);

  Eigen::VectorXd r(n), y(n);
  Eigen::MatrixXd J(n, kP);
  for (int i = 0; i < n; ++i) y[i] = std::log(train[i].loss);

  long evals = 0;
  auto eval_all = [&](const std::array<double, 14>& th, Eigen::VectorXd& out,
                      Eigen::MatrixXd* jac) {
    Eigen::VectorXd g(kP);
    for (int i = 0; i < n; ++i) {
      double pred = LogLossModel::eval(th, train[i].bundle, g, jac != nullptr);
      if (jac) jac->row(i) = g.transpose();
      out[i] = pred - y[i];
    }
    ++evals;
  };

  eval_all(theta, r, &J);
  double sse = r.squaredNorm();
  double mu = 1e-3;
  RestartOutcome best;
  for (int it = 0; it < opt.max_iterations && evals < opt.max_residual_evals;
       ++it) {
    Eigen::MatrixXd jtj = J.transpose() * J;
    Eigen::VectorXd jtr = J.transpose() * r;
    bool stepped = false;
    for (int tries = 0; tries < 12 && evals < opt.max_residual_evals;
         ++tries) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal().array() += mu * (jtj.diagonal().array() + 1e-12);
      Eigen::VectorXd step = damped.ldlt().solve(-jtr);
      std::array<double, 14> cand;
      for (int k = 0; k < kP; ++k) cand[k] = theta[k] + step[k];
      Eigen::VectorXd rc(n);
      eval_all(cand, rc, nullptr);
      double sse_c = rc.squaredNorm();
      if (std::isfinite(sse_c) && sse_c < sse) {
        theta = cand;
        r = rc;
        double improvement = (sse - sse_c) / std::max(sse, 1e-300);
        sse = sse_c;
        mu = std::max(mu * 0.3, 1e-12);
        eval_all(theta, r, &J);
        stepped = true;
        if (improvement < 1e-12) it = opt.max_iterations;  // converged
        break;
      }
      mu *= 4.0;
    }
    if (!stepped) break;
  }

  double mean_y = y.mean();
  double ss_tot = (y.array() - mean_y).square().sum();
  RestartOutcome out;
  out.theta = theta;
  out.train_r2 = ss_tot > 0.0 ? 1.0 - sse / ss_tot : 0.0;
  out.converged = std::isfinite(out.train_r2);
  return out;
}

inline double r2_on(const std::vector<ExperimentObservation>& obs,
                    const ScalingLawParams& params) {
  Eigen::VectorXd g(14);
  double mean = 0.0;
  std::vector<double> ys(obs.size()), ps(obs.size());
  auto th = params.as_array();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    ys[i] = std::log(obs[i].loss);
    ps[i] = LogLossModel::eval(th, obs[i].bundle, g, false);
    mean += ys[i];
  }
  mean /= static_cast<double>(obs.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    ss_res += (ys[i] - ps[i]) * (ys[i] - ps[i]);
    ss_tot += (ys[i] - mean) * (ys[i] - mean);
  }
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
}

}  // namespace detail

// Splits observations into train/test stratified by class count, so every
// complexity level appears in both splits.
inline void stratified_split(const std::vector<ExperimentObservation>& obs,
                             double test_fraction, std::uint64_t seed,
                             std::vector<ExperimentObservation>& train,
                             std::vector<ExperimentObservation>& test) {
  std::map<double, std::vector<std::size_t>> by_n;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    by_n[obs[i].bundle.n_class].push_back(i);
  }
  train.clear();
  test.clear();
  Rng rng(seed);
  for (auto& [n, idx] : by_n) {
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::size_t j = rng.next_u64() % i;
      std::swap(idx[i - 1], idx[j]);
    }
    std::size_t n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(idx.size())));
    if (idx.size() > 1) n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      (k < n_test ? test : train).push_back(obs[idx[k]]);
    }
  }
}

// Nonlinear least squares on ln(loss) with multi-start Gauss-Newton.
// Restarts run in parallel; each derives its own seed, so the result is
// deterministic for a given (split_seed, restarts) regardless of scheduling.
inline FitResult fit_scaling_law(const std::vector<ExperimentObservation>& obs,
                                 const FitOptions& opt = {}) {
  if (obs.size() < 30) {
    throw DegenerateDesignError("need at least 30 observations");
  }
  auto distinct = [&](auto getter) {
    std::set<double> s;
    for (const auto& o : obs) s.insert(getter(o));
    return s.size();
  };
  if (distinct([](const ExperimentObservation& o) { return o.bundle.data; }) < 2 ||
      distinct([](const ExperimentObservation& o) { return o.bundle.steps; }) < 2 ||
      distinct([](const ExperimentObservation& o) { return o.bundle.model_size; }) < 2 ||
      distinct([](const ExperimentObservation& o) { return o.bundle.n_class; }) < 2) {
    throw DegenerateDesignError("every input axis must take >= 2 values");
  }
  for (const auto& o : obs) {
    if (!(o.loss > 0.0)) throw DomainError("observed loss must be positive");
  }

  std::vector<ExperimentObservation> train, test;
  stratified_split(obs, opt.test_fraction, opt.split_seed, train, test);

  std::vector<std::uint64_t> seeds(opt.restarts);
  for (int i = 0; i < opt.restarts; ++i) {
    seeds[i] = Rng::derive(opt.split_seed, static_cast<std::uint64_t>(i + 1));
  }

  int workers = opt.threads > 0
                    ? opt.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, opt.restarts);
  std::vector<detail::RestartOutcome> outcomes(opt.restarts);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= opt.restarts) return;
      outcomes[i] = detail::fit_one_restart(train, seeds[i], opt);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int best = -1;
  for (int i = 0; i < opt.restarts; ++i) {
    if (!outcomes[i].converged) continue;
    if (best < 0 || outcomes[i].train_r2 > outcomes[best].train_r2) best = i;
  }
  if (best < 0) throw FitFailedError("no restart converged");

  FitResult res;
  res.params = ScalingLawParams::from_array(outcomes[best].theta);
  res.train_r2 = outcomes[best].train_r2;
  res.test_r2 = detail::r2_on(test, res.params);
  res.best_restart = best;
  return res;
}

// --- observation CSV I/O ----------------------------------------------------
// Header: n_class,data,steps,model_size,loss

inline CsvTable observations_to_csv(
    const std::vector<ExperimentObservation>& obs) {
  CsvTable t({"n_class", "data", "steps", "model_size", "loss"});
  for (const auto& o : obs) {
    t.add_row({CsvTable::format_double(o.bundle.n_class),
               CsvTable::format_double(o.bundle.data),
               CsvTable::format_double(o.bundle.steps),
               CsvTable::format_double(o.bundle.model_size),
               CsvTable::format_double(o.loss)});
  }
  return t;
}

inline std::vector<ExperimentObservation> observations_from_csv(
    const CsvTable& t) {
  std::vector<ExperimentObservation> obs;
  obs.reserve(t.row_count());
  for (std::size_t i = 0; i < t.row_count(); ++i) {
    ExperimentObservation o;
    o.bundle.n_class = t.cell_double(i, "n_class");
    o.bundle.data = t.cell_double(i, "data");
    o.bundle.steps = t.cell_double(i, "steps");
    o.bundle.model_size = t.cell_double(i, "model_size");
    o.loss = t.cell_double(i, "loss");
    obs.push_back(o);
  }
  return obs;
}

// Fitted parameters as key-value text with fit quality appended.
inline KeyValueFile fit_result_to_kv(const FitResult& r) {
  KeyValueFile kv = scaling_params_to_kv(r.params);
  kv.set("train_r2", r.train_r2);
  kv.set("test_r2", r.test_r2);
  return kv;
}

}  // namespace autoecon
