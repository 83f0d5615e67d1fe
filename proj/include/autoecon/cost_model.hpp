#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "autoecon/errors.hpp"
#include "autoecon/kv.hpp"

namespace autoecon {

// Structural price and technology inputs for building and running a vision
// system. Defaults are the published 2024-USD calibration.
struct CostParams {
  double kappa_init = 1000.0;   // initial fine-tuning rounds
  double kappa_recur = 6.0;     // retraining rounds per year
  double d_gpu = 0.22;          // GPU annual price decline rate
  double d = 0.05;              // economy discount rate
  double lifespan_years = 5.0;  // L
  double f_gpu = 6.0;           // FLOPs multiplier per token per parameter
  double r_flop = 4e12;         // FLOPs per GPU-hour
  double p_gpu = 0.34;          // USD per GPU-hour
  double u_gpu = 0.4;           // GPU utilization fraction
  double z_input = 256.0 * 256.0;  // input pixels per image
  double c_impl = 2144475.0;    // one-time implementation cost, USD
  double c_maint = 295123.0;    // annual maintenance cost, USD per year
  double phi = 8.0;             // annotations per datum
  double p_data_floor = 0.05;   // USD per datum, lower bound
  double tau_over_tau_gpu = 2.01138e13;  // human / GPU decision throughput

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw DomainError(std::string(name) + " must be positive");
    };
    positive(kappa_init, "kappa_init");
    positive(kappa_recur, "kappa_recur");
    positive(f_gpu, "F_GPU");
    positive(r_flop, "r_FLOP");
    positive(p_gpu, "p_GPU");
    positive(z_input, "Z_input");
    positive(c_impl, "C_impl");
    positive(c_maint, "C_maint");
    positive(phi, "Phi");
    positive(p_data_floor, "p_data_floor");
    positive(tau_over_tau_gpu, "tau_over_tau_GPU");
    if (d <= 0.0 || d >= 1.0) throw DomainError("d must lie in (0, 1)");
    if (d_gpu <= 0.0 || d_gpu >= 1.0) throw DomainError("d_GPU must lie in (0, 1)");
    if (u_gpu <= 0.0 || u_gpu >= 1.0) throw DomainError("U_GPU must lie in (0, 1)");
    if (lifespan_years < 1.0 ||
        lifespan_years != std::floor(lifespan_years)) {
      throw DomainError("L must be an integer >= 1");
    }
  }
};

// Geometric discount sums over the system lifespan.
//   plain = sum_{t=0..L-1} (1/(1+d))^t
//   joint = same at the combined rate (1+d)(1+d_gpu)
// The *_from_t1 variants start the sum at t = 1; they price streams that
// begin one year after deployment.
struct AnnuityFactors {
  double plain;
  double joint;
  double plain_from_t1;
  double joint_from_t1;
};

inline AnnuityFactors annuity_factors(const CostParams& p) {
  p.validate();
  auto geom = [&](double q) {
    return (1.0 - std::pow(q, p.lifespan_years)) / (1.0 - q);
  };
  AnnuityFactors f;
  double q_plain = 1.0 / (1.0 + p.d);
  double q_joint = 1.0 / ((1.0 + p.d) * (1.0 + p.d_gpu));
  f.plain = geom(q_plain);
  f.joint = geom(q_joint);
  f.plain_from_t1 = q_plain * f.plain;
  f.joint_from_t1 = q_joint * f.joint;
  return f;
}

// One-time engineering block: implementation plus the discounted maintenance
// stream. Independent of every usage quantity.
inline double fixed_cost(const CostParams& p) {
  AnnuityFactors f = annuity_factors(p);
  return p.c_impl + f.plain * p.c_maint;
}

// Collecting and relabeling a dataset of D images, with kappa_recur renewal
// rounds per year discounted from t = 1, one system per subtask.
inline double data_cost(double data, double num_subtasks, double p_data,
                        const CostParams& p) {
  if (data < 0.0) throw DomainError("data must be non-negative");
  AnnuityFactors f = annuity_factors(p);
  return num_subtasks * p_data * data *
         (1.0 + p.kappa_recur * f.plain_from_t1);
}

// GPU cost of initial plus recurring training rounds; bilinear in steps and
// model size.
inline double training_cost(double steps, double model_size,
                            double num_subtasks, const CostParams& p) {
  if (steps < 0.0 || model_size < 0.0) {
    throw DomainError("steps and model_size must be non-negative");
  }
  AnnuityFactors f = annuity_factors(p);
  double rounds = p.kappa_init + p.kappa_recur * f.joint_from_t1;
  double per_step_param = p.p_gpu / (p.r_flop * p.u_gpu) * p.f_gpu * p.z_input;
  return num_subtasks * rounds * per_step_param * model_size * steps;
}

// GPU cost of serving decisions_per_year for the lifespan; bilinear in model
// size and annual decision volume.
inline double inference_cost(double model_size, double decisions_per_year,
                             double num_subtasks, const CostParams& p) {
  if (model_size < 0.0 || decisions_per_year < 0.0) {
    throw DomainError("model_size and decisions must be non-negative");
  }
  AnnuityFactors f = annuity_factors(p);
  return num_subtasks * f.joint_from_t1 * (p.p_gpu / p.u_gpu) * model_size *
         decisions_per_year / p.tau_over_tau_gpu;
}

// Cost of collecting and labeling one datum: the labeling worker's wage-time
// per judgment, scaled by the annotations-per-datum factor, floored at a
// conservative minimum. Wage given as NaN means the data is unavailable.
inline double p_data_per_datum(double wage, double time_share,
                               double vision_share, double judgment_freq,
                               const CostParams& p) {
  if (std::isnan(wage)) {
    throw MissingWageError("wage unavailable for per-datum price");
  }
  if (!(judgment_freq > 0.0)) {
    throw DomainError("judgment frequency must be positive");
  }
  double raw = wage * time_share * vision_share / judgment_freq * p.phi;
  return std::max(raw, p.p_data_floor);
}

// Reduced prices: total cost is c_f + c_d * D + c_t * T * M + c_i * M * Y.
struct ReducedCostCoefficients {
  double c_f;  // USD, fixed
  double c_d;  // USD per datum
  double c_t;  // USD per (step x parameter)
  double c_i;  // USD per (parameter x annual decision)

  // Published default prices; per-unit coefficients scale with the subtask
  // count, the fixed block does not.
  static ReducedCostCoefficients published_defaults(double num_subtasks = 1.0) {
    return {3486090.0, 6.19 * num_subtasks, 3.83e-6 * num_subtasks,
            1.29e-8 * num_subtasks};
  }

  // Exact reduction of the structural component costs above: reduced_cost
  // with these coefficients reproduces fixed + data + training + inference
  // sums identically.
  static ReducedCostCoefficients from_components(const CostParams& p,
                                                 double num_subtasks,
                                                 double p_data) {
    ReducedCostCoefficients c;
    c.c_f = fixed_cost(p);
    c.c_d = data_cost(1.0, num_subtasks, p_data, p);
    c.c_t = training_cost(1.0, 1.0, num_subtasks, p);
    c.c_i = inference_cost(1.0, 1.0, num_subtasks, p);
    return c;
  }

  // The published closed-form price expressions, which discount every
  // recurring stream with the from-t0 annuities. Differs from the component
  // reduction on the data/training/inference blocks; the recomputation
  // report surfaces the gap.
  static ReducedCostCoefficients from_table_expressions(const CostParams& p,
                                                        double num_subtasks,
                                                        double p_data) {
    AnnuityFactors f = annuity_factors(p);
    ReducedCostCoefficients c;
    c.c_f = p.c_impl + f.plain * p.c_maint;
    c.c_d = num_subtasks * (1.0 + p.kappa_recur * f.plain) * p_data;
    c.c_t = p.f_gpu * num_subtasks * (p.kappa_init + p.kappa_recur * f.joint) *
            p.p_gpu * p.z_input / (p.r_flop * p.u_gpu);
    c.c_i = num_subtasks * f.joint * (p.p_gpu / p.u_gpu) / p.tau_over_tau_gpu;
    return c;
  }
};

inline double reduced_cost(double data, double steps, double model_size,
                           double decisions_per_year,
                           const ReducedCostCoefficients& c) {
  if (data < 0.0 || steps < 0.0 || model_size < 0.0 ||
      decisions_per_year < 0.0) {
    throw DomainError("cost arguments must be non-negative");
  }
  return c.c_f + c.c_d * data + c.c_t * steps * model_size +
         c.c_i * model_size * decisions_per_year;
}

// Variable part only (everything but the fixed block).
inline double reduced_variable_cost(double data, double steps,
                                    double model_size,
                                    double decisions_per_year,
                                    const ReducedCostCoefficients& c) {
  return c.c_d * data + c.c_t * steps * model_size +
         c.c_i * model_size * decisions_per_year;
}

// --- flat key-value configuration -----------------------------------------

inline const std::set<std::string>& cost_param_keys() {
  static const std::set<std::string> kKeys = {
      "kappa_init", "kappa_recur", "d_GPU", "d", "L", "F_GPU", "r_FLOP",
      "p_GPU", "U_GPU", "Z_input", "C_impl", "C_maint", "Phi",
      "p_data_floor", "tau_over_tau_GPU"};
  return kKeys;
}

inline CostParams cost_params_from_kv(const KeyValueFile& kv,
                                      bool reject_unknown = true) {
  if (reject_unknown) {
    for (const auto& [key, value] : kv.entries()) {
      if (!cost_param_keys().count(key)) {
        throw ParseError("unknown cost parameter '" + key + "'");
      }
    }
  }
  CostParams p;
  p.kappa_init = kv.get_double_or("kappa_init", p.kappa_init);
  p.kappa_recur = kv.get_double_or("kappa_recur", p.kappa_recur);
  p.d_gpu = kv.get_double_or("d_GPU", p.d_gpu);
  p.d = kv.get_double_or("d", p.d);
  p.lifespan_years = kv.get_double_or("L", p.lifespan_years);
  p.f_gpu = kv.get_double_or("F_GPU", p.f_gpu);
  p.r_flop = kv.get_double_or("r_FLOP", p.r_flop);
  p.p_gpu = kv.get_double_or("p_GPU", p.p_gpu);
  p.u_gpu = kv.get_double_or("U_GPU", p.u_gpu);
  p.z_input = kv.get_double_or("Z_input", p.z_input);
  p.c_impl = kv.get_double_or("C_impl", p.c_impl);
  p.c_maint = kv.get_double_or("C_maint", p.c_maint);
  p.phi = kv.get_double_or("Phi", p.phi);
  p.p_data_floor = kv.get_double_or("p_data_floor", p.p_data_floor);
  p.tau_over_tau_gpu = kv.get_double_or("tau_over_tau_GPU", p.tau_over_tau_gpu);
  p.validate();
  return p;
}

inline CostParams load_cost_params(const std::string& path) {
  return cost_params_from_kv(KeyValueFile::load(path));
}

inline KeyValueFile cost_params_to_kv(const CostParams& p) {
  KeyValueFile kv;
  kv.set("kappa_init", p.kappa_init);
  kv.set("kappa_recur", p.kappa_recur);
  kv.set("d_GPU", p.d_gpu);
  kv.set("d", p.d);
  kv.set("L", p.lifespan_years);
  kv.set("F_GPU", p.f_gpu);
  kv.set("r_FLOP", p.r_flop);
  kv.set("p_GPU", p.p_gpu);
  kv.set("U_GPU", p.u_gpu);
  kv.set("Z_input", p.z_input);
  kv.set("C_impl", p.c_impl);
  kv.set("C_maint", p.c_maint);
  kv.set("Phi", p.phi);
  kv.set("p_data_floor", p.p_data_floor);
  kv.set("tau_over_tau_GPU", p.tau_over_tau_gpu);
  return kv;
}

}  // namespace autoecon
