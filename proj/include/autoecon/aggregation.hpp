#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "autoecon/csv.hpp"
#include "autoecon/errors.hpp"
#include "autoecon/numerics.hpp"
#include "autoecon/task_optimizer.hpp"

namespace autoecon {

// One published firm-count bin. `upper` is absent for the open top bin.
struct CoarseFirmSizeBin {
  double lower = 0.0;
  std::optional<double> upper;
  double firm_count = 0.0;
};

struct CoarseFirmSizeBins {
  std::vector<CoarseFirmSizeBin> bins;

  void validate() const {
    if (bins.empty()) throw DomainError("firm-size bins are empty");
    double prev_upper = 0.0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const auto& b = bins[i];
      if (b.firm_count < 0.0) throw DomainError("negative firm count");
      if (b.lower <= prev_upper && i > 0) {
        throw DomainError("bins must be non-overlapping and ascending");
      }
      if (b.upper) {
        if (*b.upper < b.lower) throw DomainError("bin upper below lower");
        prev_upper = *b.upper;
      } else if (i + 1 != bins.size()) {
        throw DomainError("only the last bin may be open-ended");
      }
    }
  }
};

// Point-mass approximation of a firm-size distribution: firm_count firms of
// exactly `size` employees, sizes ascending.
struct FirmSizePoint {
  double size = 0.0;
  double firm_count = 0.0;
};
using FineFirmSizeDistribution = std::vector<FirmSizePoint>;

struct ImputeOptions {
  int sub_bins_per_bin = 10;
  int tail_points = 30;
};

// Refines coarse bins: each closed bin splits into log-uniform sub-bins with
// the firm count divided evenly and mass placed at geometric midpoints; the
// open top bin is extended by a power-law tail with log-log slope -1,
// normalized to the bin's count and truncated at max_size.
inline FineFirmSizeDistribution impute_fine_sizes(
    const CoarseFirmSizeBins& coarse, double max_size,
    const ImputeOptions& opt = {}) {
  coarse.validate();
  if (!(max_size > 10000.0)) {
    throw DomainError("max_size must exceed the open-bin threshold");
  }
  FineFirmSizeDistribution out;
  for (const auto& bin : coarse.bins) {
    if (bin.upper) {
      int k = opt.sub_bins_per_bin;
      double lo = bin.lower;
      double hi = *bin.upper;
      double step = std::log(hi / lo) / k;
      double share = bin.firm_count / k;
      for (int i = 0; i < k; ++i) {
        double e0 = lo * std::exp(step * i);
        double e1 = lo * std::exp(step * (i + 1));
        out.push_back({std::sqrt(e0 * e1), share});
      }
    } else {
      if (max_size <= bin.lower) {
        throw DomainError("max_size must exceed the open bin lower bound");
      }
      int k = opt.tail_points;
      double step = std::log(max_size / bin.lower) / (k - 1);
      // Counts proportional to 1/size; normalized to the bin total.
      double weight_sum = 0.0;
      std::vector<double> sizes(k), weights(k);
      for (int i = 0; i < k; ++i) {
        sizes[i] = bin.lower * std::exp(step * i);
        weights[i] = 1.0 / sizes[i];
        weight_sum += weights[i];
      }
      for (int i = 0; i < k; ++i) {
        out.push_back({sizes[i], bin.firm_count * weights[i] / weight_sum});
      }
    }
  }
  return out;
}

inline double total_firm_count(const FineFirmSizeDistribution& d) {
  CompensatedSum s;
  for (const auto& p : d) s.add(p.firm_count);
  return s.value();
}

struct OccupationSizeOptions {
  int grid_points = 200;
  double grid_min = 1.0;
  double grid_max = 2e6;
};

// Occupation-specific firm sizes from subsector distributions: each
// subsector's size axis is rescaled by its occupation employment share
// (occupation headcount = share * firm size), then counts are summed. A
// single subsector passes through exactly (pure rescale); two or more are
// consolidated onto a fixed log grid so the sum is deterministic, with each
// point's count split log-linearly between its bracketing grid nodes.
inline FineFirmSizeDistribution occupation_size_distribution(
    const std::map<std::string, FineFirmSizeDistribution>& subsector_dists,
    const std::map<std::string, double>& subsector_employment,
    const std::map<std::string, double>& occupation_employment,
    const OccupationSizeOptions& opt = {}) {
  std::vector<FineFirmSizeDistribution> rescaled;
  for (const auto& [subsector, l_oi] : occupation_employment) {
    auto dist_it = subsector_dists.find(subsector);
    auto l_it = subsector_employment.find(subsector);
    if (dist_it == subsector_dists.end() ||
        l_it == subsector_employment.end()) {
      throw DomainError("occupation references missing subsector '" +
                        subsector + "'");
    }
    double l_i = l_it->second;
    if (!(l_i > 0.0) || l_oi < 0.0 || l_oi > l_i) {
      throw DomainError("occupation employment must lie in [0, subsector]");
    }
    double scale = l_oi / l_i;
    FineFirmSizeDistribution r;
    for (const auto& p : dist_it->second) {
      if (p.size * scale > 0.0) r.push_back({p.size * scale, p.firm_count});
    }
    rescaled.push_back(std::move(r));
  }
  if (rescaled.empty()) return {};
  if (rescaled.size() == 1) {
    std::sort(rescaled[0].begin(), rescaled[0].end(),
              [](const FirmSizePoint& a, const FirmSizePoint& b) {
                return a.size < b.size;
              });
    return rescaled[0];
  }

  std::vector<double> grid(opt.grid_points);
  double ln_lo = std::log(opt.grid_min);
  double ln_hi = std::log(opt.grid_max);
  for (int i = 0; i < opt.grid_points; ++i) {
    grid[i] = ln_lo + (ln_hi - ln_lo) * i / (opt.grid_points - 1);
  }
  std::vector<CompensatedSum> counts(grid.size());
  for (const auto& dist : rescaled) {
    for (const auto& p : dist) {
      double ln_s = std::clamp(std::log(p.size), ln_lo, ln_hi);
      double pos = (ln_s - ln_lo) / (ln_hi - ln_lo) * (opt.grid_points - 1);
      int i0 = std::clamp(static_cast<int>(pos), 0, opt.grid_points - 2);
      double frac = std::clamp(pos - i0, 0.0, 1.0);
      counts[i0].add(p.firm_count * (1.0 - frac));
      counts[i0 + 1].add(p.firm_count * frac);
    }
  }
  FineFirmSizeDistribution out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double c = counts[i].value();
    if (c > 0.0) out.push_back({std::exp(grid[i]), c});
  }
  return out;
}

// --- decision aggregation ---------------------------------------------------

// One decided task with the identifiers and weights aggregation needs.
struct DecisionRecord {
  std::string occupation;
  Regime regime = Regime::kNone;
  double substitution_ratio = 0.0;
  double total_benefit = 0.0;
  double wage = 0.0;
  double employees = 0.0;
  double time_share = 0.0;
  double vision_share = 0.0;
  FeasibilityFlags flags;
};

// The three reportable outcome classes. They partition decided tasks with a
// positive automation choice.
enum class BenefitCondition {
  kFullOptimal,                  // full automation feasible and optimal
  kPartialOptimalBothFeasible,   // both feasible, partial optimal
  kPartialOptimalFullInfeasible  // only partial feasible, partial optimal
};

inline bool matches_condition(const DecisionRecord& d, BenefitCondition z) {
  switch (z) {
    case BenefitCondition::kFullOptimal:
      return d.flags.full_feasible && d.flags.full_optimal;
    case BenefitCondition::kPartialOptimalBothFeasible:
      return d.flags.full_feasible && d.flags.partial_feasible &&
             d.flags.partial_optimal;
    case BenefitCondition::kPartialOptimalFullInfeasible:
      return !d.flags.full_feasible && d.flags.partial_feasible &&
             d.flags.partial_optimal;
  }
  return false;
}

// Realized benefit sum over tasks in one occupation satisfying condition z.
inline double occupation_benefit(const std::vector<DecisionRecord>& decisions,
                                 const std::string& occupation,
                                 BenefitCondition z) {
  CompensatedSum s;
  for (const auto& d : decisions) {
    if (d.occupation == occupation && matches_condition(d, z)) {
      s.add(d.total_benefit * d.substitution_ratio);
    }
  }
  return s.value();
}

struct AutomationRateOptions {
  // The published weighting omits the time share from the denominator; the
  // alternative divides by full task compensation instead.
  bool tau_weighted_denominator = false;
};

// Compensation-weighted automation rate:
//   sum_i r_i N_i w_i tau_i / sum_i N_i w_i       (published form)
//   sum_i r_i N_i w_i tau_i / sum_i N_i w_i tau_i (alternative)
inline double automation_rate(const std::vector<DecisionRecord>& decisions,
                              const AutomationRateOptions& opt = {}) {
  if (decisions.empty()) throw ZeroDenominatorError("no decisions");
  CompensatedSum num, den;
  for (const auto& d : decisions) {
    num.add(d.substitution_ratio * d.employees * d.wage * d.time_share);
    den.add(opt.tau_weighted_denominator
                ? d.employees * d.wage * d.time_share
                : d.employees * d.wage);
  }
  if (den.value() <= 0.0) throw ZeroDenominatorError("zero total weight");
  return num.value() / den.value();
}

// Where the compensation base ends up. Together with realized savings these
// reconstruct the full base exactly.
struct ResidualDecomposition {
  double non_automatable = 0.0;  // (1 - vision share) part of every task
  double not_adopted = 0.0;      // automatable part of tasks left to labor
  double partial_residual = 0.0; // automatable-but-human part of partial tasks
  double realized_savings = 0.0; // automatable part absorbed by systems
  double compensation_base = 0.0;
};

inline ResidualDecomposition residual_decomposition(
    const std::vector<DecisionRecord>& decisions) {
  CompensatedSum non_auto, not_adopted, partial_res, savings, base;
  for (const auto& d : decisions) {
    double comp = d.wage * d.employees * d.time_share;
    double automatable = comp * d.vision_share;
    base.add(comp);
    non_auto.add(comp - automatable);
    switch (d.regime) {
      case Regime::kNone:
        not_adopted.add(automatable);
        break;
      case Regime::kPartial:
        partial_res.add(automatable * (1.0 - d.substitution_ratio));
        savings.add(automatable * d.substitution_ratio);
        break;
      case Regime::kFull:
        savings.add(automatable);
        break;
    }
  }
  ResidualDecomposition r;
  r.non_automatable = non_auto.value();
  r.not_adopted = not_adopted.value();
  r.partial_residual = partial_res.value();
  r.realized_savings = savings.value();
  r.compensation_base = base.value();
  return r;
}

struct OccupationRollup {
  std::string occupation;
  double full_optimal_benefit = 0.0;
  double partial_optimal_both_feasible_benefit = 0.0;
  double partial_optimal_full_infeasible_benefit = 0.0;
  double compensation_base = 0.0;
  double rate = 0.0;
};

inline std::vector<OccupationRollup> occupation_rollups(
    const std::vector<DecisionRecord>& decisions,
    const AutomationRateOptions& rate_opt = {}) {
  std::map<std::string, std::vector<DecisionRecord>> by_occ;
  for (const auto& d : decisions) by_occ[d.occupation].push_back(d);
  std::vector<OccupationRollup> out;
  for (const auto& [occ, ds] : by_occ) {
    OccupationRollup r;
    r.occupation = occ;
    r.full_optimal_benefit =
        occupation_benefit(ds, occ, BenefitCondition::kFullOptimal);
    r.partial_optimal_both_feasible_benefit = occupation_benefit(
        ds, occ, BenefitCondition::kPartialOptimalBothFeasible);
    r.partial_optimal_full_infeasible_benefit = occupation_benefit(
        ds, occ, BenefitCondition::kPartialOptimalFullInfeasible);
    CompensatedSum base;
    for (const auto& d : ds) base.add(d.wage * d.employees * d.time_share);
    r.compensation_base = base.value();
    r.rate = automation_rate(ds, rate_opt);
    out.push_back(std::move(r));
  }
  return out;
}

// --- CSV interfaces ----------------------------------------------------------
// Coarse bins: bin_lower,bin_upper,firm_count with an empty upper for the
// open bin. Rollups: one row per occupation.

inline CoarseFirmSizeBins coarse_bins_from_csv(const CsvTable& t) {
  CoarseFirmSizeBins out;
  for (std::size_t i = 0; i < t.row_count(); ++i) {
    CoarseFirmSizeBin b;
    b.lower = t.cell_double(i, "bin_lower");
    double upper = t.cell_double(i, "bin_upper");
    if (!std::isnan(upper)) b.upper = upper;
    b.firm_count = t.cell_double(i, "firm_count");
    out.bins.push_back(b);
  }
  out.validate();
  return out;
}

inline CsvTable fine_sizes_to_csv(const FineFirmSizeDistribution& d) {
  CsvTable t({"size", "firm_count"});
  for (const auto& p : d) {
    t.add_row({CsvTable::format_double(p.size),
               CsvTable::format_double(p.firm_count)});
  }
  return t;
}

inline CsvTable rollups_to_csv(const std::vector<OccupationRollup>& rollups) {
  CsvTable t({"occupation", "full_optimal_benefit",
              "partial_optimal_both_feasible_benefit",
              "partial_optimal_full_infeasible_benefit", "compensation_base",
              "automation_rate"});
  for (const auto& r : rollups) {
    t.add_row({r.occupation, CsvTable::format_double(r.full_optimal_benefit),
               CsvTable::format_double(r.partial_optimal_both_feasible_benefit),
               CsvTable::format_double(r.partial_optimal_full_infeasible_benefit),
               CsvTable::format_double(r.compensation_base),
               CsvTable::format_double(r.rate)});
  }
  return t;
}

}  // namespace autoecon
