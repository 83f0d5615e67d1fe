#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "autoecon/cost_model.hpp"
#include "autoecon/entropy_map.hpp"
#include "autoecon/errors.hpp"
#include "autoecon/numerics.hpp"
#include "autoecon/rng.hpp"
#include "autoecon/scaling_law.hpp"

namespace autoecon {

// Economic description of one task instance at a given deployment scale.
struct TaskEconomics {
  double wage = 0.0;              // USD per worker-year
  double employees = 0.0;         // N
  double time_share = 0.0;        // fraction of work time on this task
  double vision_share = 0.0;      // technically automatable fraction
  double num_subtasks = 1.0;      // m
  double n_class = 2.0;           // classes per subtask
  double h_task = 0.0;            // baseline loss, nats
  double h_req = 0.0;             // required loss, nats (h_req < h_task)
  double annual_decisions = 0.0;  // Y, decisions per year
  double npv_factor = 1.0;        // benefit-side lifetime discount factor
  double p_data = 0.0;            // USD per datum (structural pricing)

  void validate() const {
    if (h_req >= h_task) throw DomainError("h_req must be below h_task");
    if (time_share < 0.0 || time_share > 1.0 || vision_share < 0.0 ||
        vision_share > 1.0) {
      throw DomainError("shares must lie in [0, 1]");
    }
    if (wage < 0.0 || employees < 0.0) {
      throw DomainError("wage and employees must be non-negative");
    }
  }
};

// Discounted labor saving if the automatable share were fully replaced.
inline double total_benefit(const TaskEconomics& t) {
  return t.employees * t.wage * t.time_share * t.vision_share * t.npv_factor;
}

// Constant marginal benefit per nat of loss reduction.
inline double marginal_benefit(const TaskEconomics& t) {
  return total_benefit(t) / (t.h_task - t.h_req);
}

struct CostMinSolution {
  InputBundle bundle;
  double variable_cost = 0.0;  // reduced cost without the fixed block
  double achieved_loss = 0.0;
  double shadow_price = 0.0;   // USD per nat of loss reduction
  double shadow_price_kkt = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;      // multiplier and finite difference agree
};

struct SolverOptions {
  int starts = 8;                        // random descent starts
  std::uint64_t seed = 20240601;
  double golden_tol_nats = 1e-4;         // outer loss search tolerance
  double step_floor_per_datum = 1000.0;  // steps >= this * n_class * data
  double lambda_agree_rel = 0.05;
  int penalty_rounds = 3;
  int descent_iters = 40;
  int polish_sweeps = 8;
  double polish_tol = 1e-7;  // log-coordinate golden tolerance
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-task view of the minimization problem in log coordinates.
struct CostSurface {
  double a, b, c;
  double alpha_eff, beta, sigma, g_const, n_pow_k;
  double ln_d_lo, ln_d_hi, ln_t_lo, ln_t_hi, ln_m_lo, ln_m_hi;
  double ln_c_step;     // feasibility: ln_t >= ln_c_step + ln_d
  double cd, ct, ci_y;  // cost = cd e^d + ct e^{t+m} + ci_y e^m (logs)

  static CostSurface make(const TaskEconomics& econ,
                          const ReducedCostCoefficients& coeffs,
                          const ScalingLawParams& law,
                          const SupportedRegime& regime,
                          const SolverOptions& opt) {
    CostSurface s;
    EffectiveConstants e = effective_constants(econ.n_class, law);
    s.a = e.a;
    s.b = e.b;
    s.c = e.c;
    s.alpha_eff = e.alpha_eff;
    s.beta = e.beta;
    s.sigma = e.sigma;
    s.g_const = law.G;
    s.n_pow_k = e.n_pow_k;
    s.ln_d_lo = std::log(regime.data_per_class_min * econ.n_class);
    s.ln_d_hi = std::log(regime.data_per_class_max * econ.n_class);
    s.ln_t_lo = std::log(regime.steps_min);
    s.ln_t_hi = std::log(regime.steps_max);
    s.ln_m_lo = std::log(regime.model_min);
    s.ln_m_hi = std::log(regime.model_max);
    s.ln_c_step = std::log(opt.step_floor_per_datum * econ.n_class);
    s.cd = coeffs.c_d;
    s.ct = coeffs.c_t;
    s.ci_y = coeffs.c_i * econ.annual_decisions;
    return s;
  }

  double loss(double ln_d, double ln_t, double ln_m) const {
    return n_pow_k * (alpha_eff * std::exp(-a * ln_d) +
                      beta * std::exp(-b * ln_t) +
                      sigma * std::exp(-c * ln_m) + g_const);
  }
  double cost(double ln_d, double ln_t, double ln_m) const {
    return cd * std::exp(ln_d) + ct * std::exp(ln_t + ln_m) +
           ci_y * std::exp(ln_m);
  }

  bool box_nonempty() const { return ln_t_hi >= ln_c_step + ln_d_lo; }

  // Loss at the most capable feasible corner; nothing lower is attainable.
  double min_achievable_loss() const {
    double ln_d = std::min(ln_d_hi, ln_t_hi - ln_c_step);
    return loss(ln_d, ln_t_hi, ln_m_hi);
  }

  // Cheapest corner of the feasible box, ignoring the loss constraint.
  std::array<double, 3> cheap_corner() const {
    return {ln_d_lo, std::max(ln_t_lo, ln_c_step + ln_d_lo), ln_m_lo};
  }

  // Smallest ln D meeting the loss target at (ln_t, ln_m); +inf when the
  // target is unreachable there.
  double ln_d_required(double h_target, double ln_t, double ln_m) const {
    double need = h_target / n_pow_k - g_const - beta * std::exp(-b * ln_t) -
                  sigma * std::exp(-c * ln_m);
    if (need <= 0.0) return kInf;
    return std::log(alpha_eff / need) / a;
  }

  // Reduced two-variable objective: data is set to the cheapest feasible
  // level for the target, so the loss constraint holds by construction.
  double reduced_objective(double h_target, double ln_t, double ln_m,
                           double* ln_d_out = nullptr) const {
    double ln_d_cap = std::min(ln_d_hi, ln_t - ln_c_step);
    if (ln_d_cap < ln_d_lo) return kInf;
    double ln_d_req = ln_d_required(h_target, ln_t, ln_m);
    if (ln_d_req > ln_d_cap + 1e-12) return kInf;
    double ln_d = std::max(ln_d_req, ln_d_lo);
    if (ln_d_out) *ln_d_out = ln_d;
    return cost(ln_d, ln_t, ln_m);
  }

  // Step floor taken as binding: T = c_step * D with D solving the loss
  // equality at the given model size. Returns the cost and the coordinates,
  // or +inf when no such point exists inside the box.
  double floor_active_objective(double h_target, double ln_m, double* ln_d_out,
                                double* ln_t_out) const {
    double rhs = h_target / n_pow_k - g_const - sigma * std::exp(-c * ln_m);
    if (rhs <= 0.0) return kInf;
    double lo = ln_d_lo;
    double hi = std::min(ln_d_hi, ln_t_hi - ln_c_step);
    if (hi < lo) return kInf;
    auto gap = [&](double ln_d) {
      return alpha_eff * std::exp(-a * ln_d) +
             beta * std::exp(-b * (ln_c_step + ln_d)) - rhs;
    };
    double ln_d;
    if (gap(hi) > 0.0) return kInf;  // even the largest dataset falls short
    if (gap(lo) <= 0.0) {
      ln_d = lo;  // loss already met at the smallest dataset
    } else {
      double a_ = lo, b_ = hi;
      for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (a_ + b_);
        (gap(mid) > 0.0 ? a_ : b_) = mid;
      }
      ln_d = 0.5 * (a_ + b_);
    }
    double ln_t = ln_c_step + ln_d;
    if (ln_t < ln_t_lo - 1e-12) return kInf;  // floor slack here; not this branch
    if (ln_d_out) *ln_d_out = ln_d;
    if (ln_t_out) *ln_t_out = ln_t;
    return cost(ln_d, ln_t, ln_m);
  }

  // Data box taken as binding: D = D_hi with T solving the loss equality at
  // the given model size (clamped up to the box/floor minimum).
  double data_cap_objective(double h_target, double ln_m,
                            double* ln_t_out) const {
    double need = h_target / n_pow_k - g_const -
                  alpha_eff * std::exp(-a * ln_d_hi) -
                  sigma * std::exp(-c * ln_m);
    if (need <= 0.0) return kInf;
    double ln_t_req = std::log(beta / need) / b;
    double ln_t_min = std::max(ln_t_lo, ln_c_step + ln_d_hi);
    if (ln_t_min > ln_t_hi) return kInf;
    double ln_t = std::clamp(std::max(ln_t_req, ln_t_min), ln_t_min, ln_t_hi);
    if (ln_t_req > ln_t_hi + 1e-12) return kInf;
    if (ln_t_out) *ln_t_out = ln_t;
    return cost(ln_d_hi, ln_t, ln_m);
  }
};

struct CorePoint {
  double ln_d = 0.0, ln_t = 0.0, ln_m = 0.0;
  double cost = kInf;
};

// Projected Barzilai-Borwein descent on the quadratically penalized
// objective in (ln D, ln T, ln M), with the penalty weight ramped up across
// rounds. Produces a rough point for the exact polish.
inline std::array<double, 3> penalty_descent(const CostSurface& s,
                                             double h_target,
                                             std::array<double, 3> x,
                                             const SolverOptions& opt) {
  const double ln_h = std::log(h_target);
  const double cost_scale =
      std::max(s.cost(s.ln_d_hi, s.ln_t_hi, s.ln_m_hi), 1e-12);
  auto clip = [&](std::array<double, 3>& v) {
    v[0] = std::clamp(v[0], s.ln_d_lo, s.ln_d_hi);
    v[1] = std::clamp(v[1], s.ln_t_lo, s.ln_t_hi);
    v[2] = std::clamp(v[2], s.ln_m_lo, s.ln_m_hi);
  };
  clip(x);
  for (int round = 0; round < opt.penalty_rounds; ++round) {
    const double mu = 1e2 * std::pow(100.0, round);
    auto fg = [&](const std::array<double, 3>& v, std::array<double, 3>& g) {
      double td = s.alpha_eff * std::exp(-s.a * v[0]);
      double tt = s.beta * std::exp(-s.b * v[1]);
      double tm = s.sigma * std::exp(-s.c * v[2]);
      double bracket = std::max(td + tt + tm + s.g_const, 1e-300);
      double ln_loss = std::log(bracket * s.n_pow_k);
      double f = s.cost(v[0], v[1], v[2]) / cost_scale;
      g[0] = s.cd * std::exp(v[0]) / cost_scale;
      g[1] = s.ct * std::exp(v[1] + v[2]) / cost_scale;
      g[2] = (s.ct * std::exp(v[1] + v[2]) + s.ci_y * std::exp(v[2])) /
             cost_scale;
      double viol = ln_loss - ln_h;
      if (viol > 0.0) {
        f += mu * viol * viol;
        double coef = 2.0 * mu * viol / bracket;
        g[0] += coef * (-s.a * td);
        g[1] += coef * (-s.b * tt);
        g[2] += coef * (-s.c * tm);
      }
      double floor_viol = s.ln_c_step + v[0] - v[1];
      if (floor_viol > 0.0) {
        f += mu * floor_viol * floor_viol;
        g[0] += 2.0 * mu * floor_viol;
        g[1] -= 2.0 * mu * floor_viol;
      }
      return f;
    };
    std::array<double, 3> g{}, x_prev{}, g_prev{};
    double f = fg(x, g);
    double step = 0.1;
    for (int it = 0; it < opt.descent_iters; ++it) {
      if (it > 0) {
        double sy = 0.0, ss = 0.0;
        for (int k = 0; k < 3; ++k) {
          double dx = x[k] - x_prev[k];
          double dg = g[k] - g_prev[k];
          sy += dx * dg;
          ss += dx * dx;
        }
        if (sy > 1e-18) step = std::clamp(ss / sy, 1e-6, 10.0);
      }
      x_prev = x;
      g_prev = g;
      bool accepted = false;
      for (int bt = 0; bt < 10; ++bt) {
        std::array<double, 3> cand;
        for (int k = 0; k < 3; ++k) cand[k] = x[k] - step * g[k];
        clip(cand);
        std::array<double, 3> gc;
        double fc = fg(cand, gc);
        if (fc <= f) {
          x = cand;
          g = gc;
          f = fc;
          accepted = true;
          break;
        }
        step *= 0.3;
      }
      if (!accepted) break;
      double moved = std::abs(x[0] - x_prev[0]) + std::abs(x[1] - x_prev[1]) +
                     std::abs(x[2] - x_prev[2]);
      if (moved < 1e-12) break;
    }
  }
  return x;
}

// Golden line searches over (ln T, ln M) on the reduced objective: the two
// axes plus the two diagonals, which avoids zigzag stalls in valleys where
// the constraints couple the coordinates. Never accepts a worse point, so a
// feasible start stays feasible even where the objective has infinite
// (infeasible) plateaus.
inline CorePoint coordinate_polish(const CostSurface& s, double h_target,
                                   double ln_t, double ln_m,
                                   const SolverOptions& opt) {
  ln_t = std::clamp(ln_t, s.ln_t_lo, s.ln_t_hi);
  ln_m = std::clamp(ln_m, s.ln_m_lo, s.ln_m_hi);
  double f_cur = s.reduced_objective(h_target, ln_t, ln_m);

  // Minimize along (ln_t + u*dt, ln_m + u*dm) for u in the box-feasible
  // interval around the current point.
  auto line_min = [&](double dt, double dm) {
    double u_lo = -kInf, u_hi = kInf;
    auto bound = [&](double x, double lo, double hi, double dir) {
      if (dir > 0.0) {
        u_lo = std::max(u_lo, (lo - x) / dir);
        u_hi = std::min(u_hi, (hi - x) / dir);
      } else if (dir < 0.0) {
        u_lo = std::max(u_lo, (hi - x) / dir);
        u_hi = std::min(u_hi, (lo - x) / dir);
      }
    };
    bound(ln_t, s.ln_t_lo, s.ln_t_hi, dt);
    bound(ln_m, s.ln_m_lo, s.ln_m_hi, dm);
    if (!(u_hi > u_lo)) return;
    auto obj = [&](double u) {
      return s.reduced_objective(h_target, ln_t + u * dt, ln_m + u * dm);
    };
    double cand = golden_section_minimize(obj, u_lo, u_hi, opt.polish_tol);
    double f_cand = obj(cand);
    if (f_cand >= f_cur) {
      // Full-range search failed (infeasible probes); refine around 0.
      double w = 0.05 * (u_hi - u_lo);
      cand = golden_section_minimize(obj, std::max(u_lo, -w),
                                     std::min(u_hi, w), opt.polish_tol);
      f_cand = obj(cand);
    }
    if (f_cand < f_cur) {
      f_cur = f_cand;
      ln_t += cand * dt;
      ln_m += cand * dm;
    }
  };

  for (int sweep = 0; sweep < opt.polish_sweeps; ++sweep) {
    double f_before = f_cur;
    line_min(1.0, 0.0);
    line_min(0.0, 1.0);
    line_min(1.0, 1.0);
    line_min(1.0, -1.0);
    if (std::isfinite(f_before) &&
        f_before - f_cur < 1e-12 * std::max(1.0, f_cur)) {
      break;
    }
  }
  CorePoint p;
  double ln_d = 0.0;
  p.cost = s.reduced_objective(h_target, ln_t, ln_m, &ln_d);
  p.ln_d = ln_d;
  p.ln_t = ln_t;
  p.ln_m = ln_m;
  return p;
}

// Core solve. Throws InfeasibleError when no point of the constrained box
// attains the target.
inline CorePoint solve_core(const CostSurface& s, double h_target,
                            const SolverOptions& opt,
                            const CorePoint* warm = nullptr) {
  if (!s.box_nonempty()) {
    throw InfeasibleError("step-floor constraint empties the feasible box");
  }
  if (h_target < s.min_achievable_loss() * (1.0 - 1e-12)) {
    throw InfeasibleError("loss target below the minimum achievable loss");
  }
  auto corner = s.cheap_corner();
  if (s.loss(corner[0], corner[1], corner[2]) <= h_target) {
    CorePoint p;
    p.ln_d = corner[0];
    p.ln_t = corner[1];
    p.ln_m = corner[2];
    p.cost = s.cost(corner[0], corner[1], corner[2]);
    return p;
  }

  CorePoint best;
  auto consider = [&](const CorePoint& c) {
    if (c.cost < best.cost) best = c;
  };
  if (warm) {
    consider(coordinate_polish(s, h_target, warm->ln_t, warm->ln_m, opt));
  } else {
    std::vector<std::array<double, 3>> rough;
    Rng rng(opt.seed);
    for (int start = 0; start < opt.starts; ++start) {
      std::array<double, 3> x0;
      if (start == 0) {
        x0 = {0.5 * (s.ln_d_lo + s.ln_d_hi), 0.5 * (s.ln_t_lo + s.ln_t_hi),
              0.5 * (s.ln_m_lo + s.ln_m_hi)};
      } else {
        x0[0] = rng.uniform(s.ln_d_lo, s.ln_d_hi);
        double t_floor = std::max(s.ln_t_lo, s.ln_c_step + x0[0]);
        x0[1] =
            t_floor <= s.ln_t_hi ? rng.uniform(t_floor, s.ln_t_hi) : s.ln_t_hi;
        x0[2] = rng.uniform(s.ln_m_lo, s.ln_m_hi);
      }
      rough.push_back(penalty_descent(s, h_target, x0, opt));
    }
    std::sort(rough.begin(), rough.end(),
              [&](const auto& l, const auto& r) {
                return s.reduced_objective(h_target, l[1], l[2]) <
                       s.reduced_objective(h_target, r[1], r[2]);
              });
    int polish_count = std::min<std::size_t>(3, rough.size());
    for (int i = 0; i < polish_count; ++i) {
      consider(coordinate_polish(s, h_target, rough[i][1], rough[i][2], opt));
    }
  }
  // The most capable corner is feasible whenever the problem is, so this
  // start guarantees a finite candidate.
  consider(coordinate_polish(s, h_target, s.ln_t_hi, s.ln_m_hi, opt));

  // Exact solves of the two coupled-boundary branches, where the
  // two-variable view can only creep along a curved constraint edge.
  {
    auto obj = [&](double ln_m) {
      return s.floor_active_objective(h_target, ln_m, nullptr, nullptr);
    };
    double ln_m = golden_section_minimize(obj, s.ln_m_lo, s.ln_m_hi,
                                          opt.polish_tol);
    CorePoint p;
    p.cost = s.floor_active_objective(h_target, ln_m, &p.ln_d, &p.ln_t);
    p.ln_m = ln_m;
    if (std::isfinite(p.cost)) consider(p);
  }
  {
    auto obj = [&](double ln_m) {
      return s.data_cap_objective(h_target, ln_m, nullptr);
    };
    double ln_m = golden_section_minimize(obj, s.ln_m_lo, s.ln_m_hi,
                                          opt.polish_tol);
    CorePoint p;
    p.cost = s.data_cap_objective(h_target, ln_m, &p.ln_t);
    p.ln_d = s.ln_d_hi;
    p.ln_m = ln_m;
    if (std::isfinite(p.cost)) consider(p);
  }

  if (!std::isfinite(best.cost)) {
    throw InfeasibleError("no feasible point attains the loss target");
  }
  return best;
}

}  // namespace detail

// Cheapest system meeting `h_target` within the supported regime, subject to
// the training-step floor steps >= step_floor_per_datum * n_class * data.
// The shadow price is extracted twice -- from the active-constraint
// multiplier and from a finite difference of the value function -- and the
// solution is flagged converged only when the two agree.
inline CostMinSolution min_cost_for_target(
    double h_target, const TaskEconomics& econ,
    const ReducedCostCoefficients& coeffs, const ScalingLawParams& law,
    const SupportedRegime& regime = {}, const SolverOptions& opt = {},
    bool want_shadow_price = true) {
  if (!(h_target > 0.0)) throw DomainError("loss target must be positive");
  detail::CostSurface s =
      detail::CostSurface::make(econ, coeffs, law, regime, opt);
  detail::CorePoint p = detail::solve_core(s, h_target, opt);

  CostMinSolution sol;
  sol.bundle.data = std::exp(p.ln_d);
  sol.bundle.steps = std::exp(p.ln_t);
  sol.bundle.model_size = std::exp(p.ln_m);
  sol.bundle.n_class = econ.n_class;
  sol.variable_cost = p.cost;
  sol.achieved_loss = s.loss(p.ln_d, p.ln_t, p.ln_m);

  if (!want_shadow_price) {
    sol.converged = true;
    return sol;
  }

  const double edge = 1e-6;
  // Active within the line-search tolerance: the polished point can sit a
  // hair on either side of the constraint surface.
  bool loss_active = sol.achieved_loss > h_target * (1.0 - 1e-6);
  bool floor_active = p.ln_t < s.ln_c_step + p.ln_d + edge;
  auto interior = [&](double x, double lo, double hi) {
    return x > lo + edge && x < hi - edge;
  };
  double lambda_kkt = std::numeric_limits<double>::quiet_NaN();
  if (!loss_active) {
    lambda_kkt = 0.0;
  } else {
    // d(cost)/d(ln x) over -d(loss)/d(ln x) for an eligible coordinate.
    double td = s.alpha_eff * std::exp(-s.a * p.ln_d);
    double tt = s.beta * std::exp(-s.b * p.ln_t);
    double tm = s.sigma * std::exp(-s.c * p.ln_m);
    double D = std::exp(p.ln_d), T = std::exp(p.ln_t), M = std::exp(p.ln_m);
    if (!floor_active && interior(p.ln_d, s.ln_d_lo, s.ln_d_hi)) {
      lambda_kkt = s.cd * D / (s.n_pow_k * s.a * td);
    } else if (!floor_active && interior(p.ln_t, s.ln_t_lo, s.ln_t_hi)) {
      lambda_kkt = s.ct * T * M / (s.n_pow_k * s.b * tt);
    } else if (interior(p.ln_m, s.ln_m_lo, s.ln_m_hi)) {
      lambda_kkt = (s.ct * T * M + s.ci_y * M) / (s.n_pow_k * s.c * tm);
    } else if (floor_active && interior(p.ln_d, s.ln_d_lo, s.ln_d_hi) &&
               p.ln_t < s.ln_t_hi - edge) {
      // Floor binding: D and T move together; use their combined ratio.
      lambda_kkt =
          (s.cd * D + s.ct * T * M) / (s.n_pow_k * (s.a * td + s.b * tt));
    }
  }
  sol.shadow_price_kkt = lambda_kkt;

  // Finite differences of the optimal value in the target. The step is wide
  // enough that the value-function change dominates solver noise. One-sided
  // slopes are kept separately: where the active constraint set changes, the
  // value function has a kink and the shadow price is an interval.
  double rel = 5e-3;
  double slope_left, slope_right;  // toward tighter / looser targets
  {
    detail::CorePoint p_plus = detail::solve_core(s, h_target * (1.0 + rel), opt);
    slope_right = (p.cost - p_plus.cost) / (rel * h_target);
    try {
      detail::CorePoint p_minus =
          detail::solve_core(s, h_target * (1.0 - rel), opt);
      slope_left = (p_minus.cost - p.cost) / (rel * h_target);
    } catch (const InfeasibleError&) {
      slope_left = slope_right;  // target sits against the achievability edge
    }
  }
  slope_left = std::max(slope_left, 0.0);
  slope_right = std::max(slope_right, 0.0);
  double lambda_fd = 0.5 * (slope_left + slope_right);
  sol.shadow_price = loss_active ? lambda_fd : 0.0;

  double scale = std::max(std::abs(lambda_fd), std::abs(lambda_kkt));
  double abs_floor = 1e-9 * std::max(1.0, p.cost / std::max(h_target, 1e-12));
  double tol = std::max(opt.lambda_agree_rel * scale, abs_floor);
  if (!std::isfinite(lambda_kkt)) {
    // Fully cornered solution: no clean multiplier; accept the fd estimate.
    sol.converged = std::isfinite(lambda_fd);
  } else if (std::abs(lambda_fd - lambda_kkt) <= tol) {
    sol.converged = true;
  } else {
    // Kink: accept a multiplier lying inside the one-sided slope interval.
    double lo = std::min(slope_left, slope_right);
    double hi = std::max(slope_left, slope_right);
    bool kink = hi - lo > opt.lambda_agree_rel * std::max(hi, 1e-300);
    sol.converged = kink && lambda_kkt >= lo * (1.0 - opt.lambda_agree_rel) &&
                    lambda_kkt <= hi * (1.0 + opt.lambda_agree_rel);
    if (sol.converged) sol.shadow_price = lambda_kkt;
  }
  return sol;
}

// Smallest loss any in-regime system can reach for this task.
inline double min_achievable_loss(const TaskEconomics& econ,
                                  const ScalingLawParams& law,
                                  const SupportedRegime& regime = {},
                                  const SolverOptions& opt = {}) {
  ReducedCostCoefficients unit{0.0, 1.0, 1.0, 1.0};
  detail::CostSurface s =
      detail::CostSurface::make(econ, unit, law, regime, opt);
  if (!s.box_nonempty()) {
    throw InfeasibleError("step-floor constraint empties the feasible box");
  }
  return s.min_achievable_loss();
}

// Optimal operating loss for a constant marginal benefit: minimizes
// h + cost(h)/mb by golden section over the achievable range. At interior
// optima the shadow price equals mb.
inline std::pair<double, CostMinSolution> inverse_marginal_cost(
    double mb, const TaskEconomics& econ,
    const ReducedCostCoefficients& coeffs, const ScalingLawParams& law,
    const SupportedRegime& regime = {}, const SolverOptions& opt = {},
    double h_lo_override = std::numeric_limits<double>::quiet_NaN()) {
  if (!(mb > 0.0)) throw DomainError("marginal benefit must be positive");
  detail::CostSurface s =
      detail::CostSurface::make(econ, coeffs, law, regime, opt);
  if (!s.box_nonempty()) {
    throw InfeasibleError("step-floor constraint empties the feasible box");
  }
  double h_lo = s.min_achievable_loss() * (1.0 + 1e-9);
  if (std::isfinite(h_lo_override)) h_lo = std::max(h_lo, h_lo_override);
  double h_hi = econ.h_task;
  detail::CorePoint warm;
  bool have_warm = false;
  auto phi = [&](double h) {
    detail::CorePoint p =
        detail::solve_core(s, h, opt, have_warm ? &warm : nullptr);
    warm = p;
    have_warm = true;
    return h + p.cost / mb;
  };
  double h_star =
      h_lo < h_hi
          ? golden_section_minimize(phi, h_lo, h_hi, opt.golden_tol_nats)
          : h_hi;
  CostMinSolution sol =
      min_cost_for_target(h_star, econ, coeffs, law, regime, opt, true);
  return {h_star, sol};
}

enum class Regime { kNone, kPartial, kFull };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kNone: return "none";
    case Regime::kPartial: return "partial";
    case Regime::kFull: return "full";
  }
  return "?";
}

struct FeasibilityFlags {
  bool full_feasible = false;
  bool partial_feasible = false;
  bool full_optimal = false;
  bool partial_optimal = false;
};

struct AutomationDecision {
  Regime regime = Regime::kNone;
  double substitution_ratio = 0.0;  // r in [0, 1]
  double optimal_loss = std::numeric_limits<double>::quiet_NaN();
  double optimal_accuracy = std::numeric_limits<double>::quiet_NaN();
  std::optional<CostMinSolution> solution;  // absent when regime is none
  double total_benefit = 0.0;
  double variable_cost = 0.0;
  double fixed_cost = 0.0;
  FeasibilityFlags flags;
  bool solver_converged = true;
};

namespace detail {

inline double substitution_ratio_at(const TaskEconomics& t, double h) {
  return std::clamp((t.h_task - h) / (t.h_task - t.h_req), 0.0, 1.0);
}

inline double accuracy_at_loss(double h, double n,
                               const EntropyFitParams& ep) {
  double a_lo = 1.0 / n + kAccuracyEdge;
  double a_hi = 1.0 - kAccuracyEdge;
  double h_min = entropy_from_accuracy(a_hi, n, ep);
  double h_max = entropy_from_accuracy(a_lo, n, ep);
  if (h <= h_min) return a_hi;
  if (h >= h_max) return a_lo;
  return accuracy_from_entropy(h, n, ep);
}

}  // namespace detail

// Feasibility and optimality of full/partial automation given the solved
// operating loss and its net saving. Full automation is feasible when a
// system at the required loss costs no more than the labor it replaces;
// partial automation is feasible when any admissible loss level does. The
// interior search already maximizes the net saving, so its sign settles
// partial feasibility; a coarse grid re-checks negatives against solver
// noise.
inline FeasibilityFlags classify_feasibility(
    const TaskEconomics& econ, const ReducedCostCoefficients& coeffs,
    const ScalingLawParams& law, const SupportedRegime& regime,
    const SolverOptions& opt, double h_star, double net_at_h_star,
    const std::optional<CostMinSolution>& at_req) {
  FeasibilityFlags flags;
  double tb = total_benefit(econ);
  if (at_req) {
    flags.full_feasible = tb - at_req->variable_cost - coeffs.c_f >= 0.0;
  }
  bool partial_feasible = net_at_h_star >= 0.0;
  if (!partial_feasible) {
    double h_lo = std::max(econ.h_req, 0.0);
    try {
      h_lo = std::max(h_lo, min_achievable_loss(econ, law, regime, opt));
    } catch (const InfeasibleError&) {
      h_lo = econ.h_task;
    }
    for (int i = 1; i <= 5 && !partial_feasible; ++i) {
      double h = h_lo + (econ.h_task - h_lo) * i / 6.0;
      try {
        CostMinSolution g =
            min_cost_for_target(h, econ, coeffs, law, regime, opt, false);
        double rg = detail::substitution_ratio_at(econ, h);
        partial_feasible = tb * rg - g.variable_cost - coeffs.c_f >= 0.0;
      } catch (const InfeasibleError&) {
      }
    }
  }
  flags.partial_feasible = partial_feasible;
  double req_tol = 1e-9 * std::max(1.0, std::abs(econ.h_req));
  flags.full_optimal = flags.full_feasible && h_star <= econ.h_req + req_tol;
  flags.partial_optimal =
      flags.partial_feasible && h_star > econ.h_req + req_tol;
  return flags;
}

// Two-stage automation choice for one task. Stage two selects the operating
// loss by weighing the constant marginal benefit against the rising marginal
// cost of quality; stage one keeps the system only if realized benefits
// cover variable plus fixed costs.
inline AutomationDecision decide_automation(
    const TaskEconomics& econ, const ReducedCostCoefficients& coeffs,
    const ScalingLawParams& law, const SupportedRegime& regime = {},
    const EntropyFitParams& entropy_params = {},
    const SolverOptions& opt = {}) {
  econ.validate();
  AutomationDecision d;
  d.fixed_cost = coeffs.c_f;
  d.total_benefit = total_benefit(econ);
  if (d.total_benefit <= 0.0) {
    return d;  // nothing automatable or nobody doing the task
  }

  double mb = marginal_benefit(econ);
  CostMinSolution at_task;
  try {
    at_task = min_cost_for_target(econ.h_task, econ, coeffs, law, regime, opt);
  } catch (const InfeasibleError&) {
    return d;  // regime box cannot even match the baseline
  }
  d.solver_converged = at_task.converged;

  // No profitable first unit of quality: marginal cost already exceeds the
  // marginal benefit at the baseline loss.
  if (mb <= at_task.shadow_price) {
    d.optimal_loss = econ.h_task;
    return d;
  }

  std::optional<CostMinSolution> at_req;
  if (econ.h_req > 0.0) {
    try {
      at_req = min_cost_for_target(econ.h_req, econ, coeffs, law, regime, opt);
    } catch (const InfeasibleError&) {
      at_req.reset();
    }
  }

  double h_star;
  CostMinSolution sol;
  if (at_req && mb >= at_req->shadow_price) {
    // Marginal benefit covers marginal cost all the way down to the
    // required loss: corner solution at full quality.
    h_star = econ.h_req;
    sol = *at_req;
  } else {
    auto [h, s] = inverse_marginal_cost(mb, econ, coeffs, law, regime, opt,
                                        econ.h_req);
    h_star = h;
    sol = s;
  }
  d.solver_converged = d.solver_converged && sol.converged;
  // Credit the loss the system actually delivers; with a slack constraint
  // (cheapest in-regime system over-delivering) it sits below the target.
  h_star = std::min(h_star, sol.achieved_loss);

  double r = detail::substitution_ratio_at(econ, h_star);
  double net = d.total_benefit * r - sol.variable_cost - coeffs.c_f;

  d.optimal_loss = h_star;
  d.optimal_accuracy =
      detail::accuracy_at_loss(h_star, econ.n_class, entropy_params);
  d.flags = classify_feasibility(econ, coeffs, law, regime, opt, h_star, net,
                                 at_req);

  if (net <= 0.0) {
    // Stage one: adopting would not beat the labor-only baseline.
    d.regime = Regime::kNone;
    d.substitution_ratio = 0.0;
    return d;
  }

  d.solution = sol;
  d.variable_cost = sol.variable_cost;
  d.substitution_ratio = r;
  d.regime = r >= 1.0 - 1e-12 ? Regime::kFull : Regime::kPartial;
  if (d.regime == Regime::kFull) d.substitution_ratio = 1.0;
  return d;
}

}  // namespace autoecon
