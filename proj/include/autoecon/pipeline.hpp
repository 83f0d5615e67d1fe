#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "autoecon/aggregation.hpp"
#include "autoecon/cost_model.hpp"
#include "autoecon/csv.hpp"
#include "autoecon/entropy_map.hpp"
#include "autoecon/errors.hpp"
#include "autoecon/kv.hpp"
#include "autoecon/rng.hpp"
#include "autoecon/scaling_fit.hpp"
#include "autoecon/scaling_law.hpp"
#include "autoecon/task_optimizer.hpp"

namespace autoecon {

// Annual decisions implied by one worker-second per decision: seconds per
// working year (3600 x 40 x 50) times the task's time and vision shares.
constexpr double kDecisionSecondsPerYear = 3600.0 * 40.0 * 50.0;

inline double annual_decisions(double time_share, double vision_share,
                               double employees) {
  return kDecisionSecondsPerYear * time_share * vision_share * employees;
}

// One merged (occupation x task x subtask-activity x industry) row.
struct TaskRow {
  std::string soc_code;
  std::string task_id;
  std::string dwa_id;
  std::string naics;
  double n_class = 0.0;
  double num_subtasks = 0.0;
  double vision_share = 0.0;
  double required_error = 0.0;
  double random_guess_error = 0.0;
  double judgment_freq = 0.0;
  double time_share = 0.0;
  double wage = 0.0;  // NaN when unavailable
  double employees = 0.0;

  // Empty when the row is valid; otherwise the rejection reason.
  std::string invariant_violation() const {
    if (!(n_class >= 2.0) || n_class != std::floor(n_class)) {
      return "n_class must be an integer >= 2";
    }
    if (!(num_subtasks >= 1.0)) return "num_tasks must be >= 1";
    if (vision_share < 0.0 || vision_share > 1.0) {
      return "vision_share outside [0, 1]";
    }
    if (time_share < 0.0 || time_share > 1.0) {
      return "time_share outside [0, 1]";
    }
    if (!(required_error >= 0.0) || required_error >= 1.0) {
      return "required_error outside [0, 1)";
    }
    if (!(random_guess_error >= 0.0) || random_guess_error >= 1.0) {
      return "random_guess_error outside [0, 1)";
    }
    if (required_error >= random_guess_error) {
      return "attention-check: required_error must be below random_guess_error";
    }
    if (!(judgment_freq > 0.0)) return "judgment_freq must be positive";
    if (!(employees >= 0.0)) return "employees must be non-negative";
    if (!std::isnan(wage) && wage < 0.0) return "wage must be non-negative";
    return "";
  }
};

enum class CostMode { kReduced, kStructural };
enum class Deployment { kFirm, kPooled };
enum class PoolKey { kOccupationTask, kOccupationTaskNaics };
enum class HTaskConvention { kLogN, kEntropyMap };

struct RunConfig {
  CostMode cost_mode = CostMode::kReduced;
  Deployment deployment = Deployment::kFirm;
  PoolKey pool_key = PoolKey::kOccupationTask;
  std::uint64_t seed = 1;
  double employment_multiplier = 1.0;
  int threads = 0;  // 0 = hardware concurrency
  CostParams cost_params;
  SupportedRegime regime;
  SolverOptions solver;
  EntropyFitParams entropy;
  ScalingLawParams law;
  FitOptions fit;
};

// One combined key-value configuration file: structural cost parameters,
// regime bounds, and solver knobs. Unknown keys are rejected.
inline RunConfig run_config_from_kv(const KeyValueFile& kv) {
  static const std::set<std::string> kRunKeys = {
      "n_min", "n_max", "data_per_class_min", "data_per_class_max",
      "steps_min", "steps_max", "model_min", "model_max",
      "solver_starts", "golden_tol_nats", "step_floor_per_datum",
      "lambda_agree_rel", "fit_restarts", "fit_max_evals", "threads",
      "employment_multiplier"};
  for (const auto& [key, value] : kv.entries()) {
    if (!cost_param_keys().count(key) && !kRunKeys.count(key)) {
      throw ParseError("unknown configuration key '" + key + "'");
    }
  }
  RunConfig c;
  c.cost_params = cost_params_from_kv(kv, /*reject_unknown=*/false);
  c.regime.n_min = kv.get_double_or("n_min", c.regime.n_min);
  c.regime.n_max = kv.get_double_or("n_max", c.regime.n_max);
  c.regime.data_per_class_min =
      kv.get_double_or("data_per_class_min", c.regime.data_per_class_min);
  c.regime.data_per_class_max =
      kv.get_double_or("data_per_class_max", c.regime.data_per_class_max);
  c.regime.steps_min = kv.get_double_or("steps_min", c.regime.steps_min);
  c.regime.steps_max = kv.get_double_or("steps_max", c.regime.steps_max);
  c.regime.model_min = kv.get_double_or("model_min", c.regime.model_min);
  c.regime.model_max = kv.get_double_or("model_max", c.regime.model_max);
  c.solver.starts =
      static_cast<int>(kv.get_double_or("solver_starts", c.solver.starts));
  c.solver.golden_tol_nats =
      kv.get_double_or("golden_tol_nats", c.solver.golden_tol_nats);
  c.solver.step_floor_per_datum =
      kv.get_double_or("step_floor_per_datum", c.solver.step_floor_per_datum);
  c.solver.lambda_agree_rel =
      kv.get_double_or("lambda_agree_rel", c.solver.lambda_agree_rel);
  c.fit.restarts =
      static_cast<int>(kv.get_double_or("fit_restarts", c.fit.restarts));
  c.fit.max_residual_evals = static_cast<long>(
      kv.get_double_or("fit_max_evals",
                       static_cast<double>(c.fit.max_residual_evals)));
  c.threads = static_cast<int>(kv.get_double_or("threads", c.threads));
  c.employment_multiplier =
      kv.get_double_or("employment_multiplier", c.employment_multiplier);
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  return run_config_from_kv(KeyValueFile::load(path));
}

// --- ingestion ---------------------------------------------------------------
// survey.csv:     soc_code,task_id,dwa_id,required_error,random_guess_error,
//                 judgment_freq,dwa_time_share,importance_score
// complexity.csv: soc_code,task_id,dwa_id,n_class,num_tasks,vision_share
// wages.csv:      soc_code,naics,wage,employees
//
// Inner joins: survey x complexity on (soc_code, task_id, dwa_id), then x
// wages on soc_code, giving one row per (soc x task x dwa x naics). The task
// time share is dwa_time_share x importance_score.

struct Rejection {
  std::string key;
  std::string reason;
};

struct IngestResult {
  std::vector<TaskRow> rows;
  std::vector<Rejection> rejections;
  std::vector<std::string> warnings;
  std::size_t merged_rows = 0;
};

inline IngestResult ingest_and_merge(const CsvTable& survey,
                                     const CsvTable& complexity,
                                     const CsvTable& wages) {
  using Key3 = std::tuple<std::string, std::string, std::string>;
  std::map<Key3, std::size_t> complexity_index;
  for (std::size_t i = 0; i < complexity.row_count(); ++i) {
    complexity_index[{complexity.cell(i, "soc_code"),
                      complexity.cell(i, "task_id"),
                      complexity.cell(i, "dwa_id")}] = i;
  }
  std::map<std::string, std::vector<std::size_t>> wages_by_soc;
  for (std::size_t i = 0; i < wages.row_count(); ++i) {
    wages_by_soc[wages.cell(i, "soc_code")].push_back(i);
  }

  IngestResult out;
  std::size_t survey_matched = 0, wage_matched = 0;
  for (std::size_t i = 0; i < survey.row_count(); ++i) {
    Key3 key{survey.cell(i, "soc_code"), survey.cell(i, "task_id"),
             survey.cell(i, "dwa_id")};
    auto cit = complexity_index.find(key);
    if (cit == complexity_index.end()) continue;
    ++survey_matched;
    auto wit = wages_by_soc.find(std::get<0>(key));
    if (wit == wages_by_soc.end()) continue;
    ++wage_matched;
    for (std::size_t w : wit->second) {
      TaskRow row;
      row.soc_code = std::get<0>(key);
      row.task_id = std::get<1>(key);
      row.dwa_id = std::get<2>(key);
      row.naics = wages.cell(w, "naics");
      row.required_error = survey.cell_double(i, "required_error");
      row.random_guess_error = survey.cell_double(i, "random_guess_error");
      row.judgment_freq = survey.cell_double(i, "judgment_freq");
      row.time_share = survey.cell_double(i, "dwa_time_share") *
                       survey.cell_double(i, "importance_score");
      row.n_class = complexity.cell_double(cit->second, "n_class");
      row.num_subtasks = complexity.cell_double(cit->second, "num_tasks");
      row.vision_share = complexity.cell_double(cit->second, "vision_share");
      row.wage = wages.cell_double(w, "wage");
      row.employees = wages.cell_double(w, "employees");
      ++out.merged_rows;
      std::string why = row.invariant_violation();
      if (why.empty()) {
        out.rows.push_back(std::move(row));
      } else {
        out.rejections.push_back(
            {row.soc_code + "/" + row.task_id + "/" + row.dwa_id + "/" +
                 row.naics,
             why});
      }
    }
  }
  if (survey.row_count() > 0 && survey_matched == 0) {
    out.warnings.push_back(
        "join keys disjoint: no survey row matches the complexity table");
  }
  if (survey_matched > 0 && wage_matched == 0) {
    out.warnings.push_back(
        "join keys disjoint: no merged row matches the wage table");
  }
  return out;
}

// --- economics construction --------------------------------------------------

struct BuiltTask {
  TaskRow row;
  TaskEconomics econ;
  bool wage_missing = false;
};

// Turns a valid row into task economics: baseline and required losses via
// the accuracy-to-loss map, per-datum labeling price (floored, flagged when
// the wage is missing), annual decision volume, and the benefit-side
// annuity. Throws DomainError for rows outside the map's usable domain.
inline BuiltTask build_economics(const TaskRow& row, const RunConfig& cfg) {
  BuiltTask b;
  b.row = row;
  TaskEconomics& e = b.econ;
  e.wage = row.wage;
  if (std::isnan(row.wage)) {
    b.wage_missing = true;
    e.wage = 0.0;
  }
  e.employees = row.employees * cfg.employment_multiplier;
  e.time_share = row.time_share;
  e.vision_share = row.vision_share;
  e.num_subtasks = row.num_subtasks;
  e.n_class = row.n_class;
  e.h_task = task_entropy(row.random_guess_error, row.n_class, cfg.entropy);
  AccuracySpec spec;
  spec.required_accuracy = 1.0 - row.required_error;
  spec.random_guess_error = row.random_guess_error;
  spec.n_class = row.n_class;
  spec.num_subtasks = row.num_subtasks;
  e.h_req = required_entropy(spec, cfg.entropy);
  if (!(e.h_req < e.h_task)) {
    throw DomainError("required loss does not fall below the baseline loss");
  }
  e.annual_decisions =
      annual_decisions(row.time_share, row.vision_share, e.employees);
  e.npv_factor = annuity_factors(cfg.cost_params).plain;
  if (b.wage_missing) {
    e.p_data = cfg.cost_params.p_data_floor;
  } else {
    e.p_data = p_data_per_datum(e.wage, row.time_share, row.vision_share,
                                row.judgment_freq, cfg.cost_params);
  }
  return b;
}

inline ReducedCostCoefficients coefficients_for(const TaskEconomics& econ,
                                                const RunConfig& cfg) {
  if (cfg.cost_mode == CostMode::kReduced) {
    return ReducedCostCoefficients::published_defaults(econ.num_subtasks);
  }
  return ReducedCostCoefficients::from_components(
      cfg.cost_params, econ.num_subtasks, econ.p_data);
}

// --- batch run ---------------------------------------------------------------

struct RowOutcome {
  BuiltTask task;
  AutomationDecision decision;
  std::string note;  // e.g. "wage_missing"
};

struct RunResult {
  std::vector<RowOutcome> outcomes;     // one per accepted, decidable row
  std::vector<Rejection> rejections;    // ingest + economics rejections
  std::vector<std::string> warnings;
  std::size_t non_converged = 0;
  std::size_t decided = 0;
};

namespace detail {

struct DecisionGroup {
  std::vector<std::size_t> member_rows;  // indices into the built-task list
  TaskEconomics econ;                    // pooled economics
};

}  // namespace detail

// Decides every row. Under pooled deployment rows sharing the pooling key
// are decided once with summed employment and an employment-weighted wage;
// members inherit the pooled choice while keeping their own weights for
// aggregation. Groups are solved concurrently; outputs are ordered by input
// row, so results do not depend on scheduling.
inline RunResult run_decisions(const std::vector<TaskRow>& rows,
                               const RunConfig& cfg) {
  RunResult result;
  std::vector<BuiltTask> built;
  std::vector<std::size_t> built_to_input;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      built.push_back(build_economics(rows[i], cfg));
      built_to_input.push_back(i);
    } catch (const Error& e) {
      result.rejections.push_back(
          {rows[i].soc_code + "/" + rows[i].task_id + "/" + rows[i].dwa_id +
               "/" + rows[i].naics,
           e.what()});
    }
  }

  // Group rows for decision.
  std::vector<detail::DecisionGroup> groups;
  if (cfg.deployment == Deployment::kFirm) {
    groups.reserve(built.size());
    for (std::size_t i = 0; i < built.size(); ++i) {
      detail::DecisionGroup g;
      g.member_rows = {i};
      g.econ = built[i].econ;
      groups.push_back(std::move(g));
    }
  } else {
    std::map<std::string, std::vector<std::size_t>> by_key;
    for (std::size_t i = 0; i < built.size(); ++i) {
      const TaskRow& r = built[i].row;
      std::string key = r.soc_code + "\x1f" + r.task_id + "\x1f" + r.dwa_id;
      if (cfg.pool_key == PoolKey::kOccupationTaskNaics) {
        key += "\x1f" + r.naics;
      }
      by_key[key].push_back(i);
    }
    for (auto& [key, members] : by_key) {
      detail::DecisionGroup g;
      g.member_rows = members;
      g.econ = built[members[0]].econ;
      if (members.size() > 1) {
        double n_total = 0.0, wage_weighted = 0.0;
        for (std::size_t i : members) {
          n_total += built[i].econ.employees;
          wage_weighted += built[i].econ.wage * built[i].econ.employees;
        }
        g.econ.employees = n_total;
        g.econ.wage = n_total > 0.0 ? wage_weighted / n_total : 0.0;
        g.econ.annual_decisions = annual_decisions(
            g.econ.time_share, g.econ.vision_share, g.econ.employees);
      }
      groups.push_back(std::move(g));
    }
  }

  std::vector<AutomationDecision> group_decisions(groups.size());
  std::vector<std::string> group_errors(groups.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t gi = next.fetch_add(1);
      if (gi >= groups.size()) return;
      SolverOptions opt = cfg.solver;
      // Seeded from the group's first input row, so grouping choices do not
      // reshuffle solver randomization.
      opt.seed = Rng::derive(
          cfg.seed, built_to_input[groups[gi].member_rows.front()]);
      try {
        ReducedCostCoefficients coeffs =
            coefficients_for(groups[gi].econ, cfg);
        group_decisions[gi] = decide_automation(
            groups[gi].econ, coeffs, cfg.law, cfg.regime, cfg.entropy, opt);
      } catch (const std::exception& e) {
        // A failed row must not sink the batch; it becomes a rejection.
        group_errors[gi] = e.what();
      }
    }
  };
  int workers = cfg.threads > 0
                    ? cfg.threads
                    : static_cast<int>(
                          std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, std::max<std::size_t>(groups.size(), 1));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<std::optional<RowOutcome>> slots(built.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (std::size_t i : groups[gi].member_rows) {
      const TaskRow& row = built[i].row;
      if (!group_errors[gi].empty()) {
        result.rejections.push_back(
            {row.soc_code + "/" + row.task_id + "/" + row.dwa_id + "/" +
                 row.naics,
             "decision failed: " + group_errors[gi]});
        continue;
      }
      RowOutcome o;
      o.task = built[i];
      o.decision = group_decisions[gi];
      // Member rows keep their own benefit for aggregation.
      o.decision.total_benefit = total_benefit(built[i].econ);
      if (built[i].wage_missing) o.note = "wage_missing";
      if (!o.decision.solver_converged) ++result.non_converged;
      ++result.decided;
      slots[i] = std::move(o);
    }
  }
  result.outcomes.reserve(built.size());
  for (auto& s : slots) {
    if (s) result.outcomes.push_back(std::move(*s));
  }
  return result;
}

inline DecisionRecord to_record(const RowOutcome& o) {
  DecisionRecord r;
  r.occupation = o.task.row.soc_code;
  r.regime = o.decision.regime;
  r.substitution_ratio = o.decision.substitution_ratio;
  r.total_benefit = o.decision.total_benefit;
  r.wage = o.task.econ.wage;
  r.employees = o.task.econ.employees;
  r.time_share = o.task.econ.time_share;
  r.vision_share = o.task.econ.vision_share;
  r.flags = o.decision.flags;
  return r;
}

// Fixed output column order.
inline CsvTable decisions_to_csv(const std::vector<RowOutcome>& outcomes) {
  CsvTable t({"soc_code", "task_id", "dwa_id", "naics", "n_class",
              "num_subtasks", "employees", "wage", "time_share",
              "vision_share", "h_task", "h_req", "regime", "replace_ratio",
              "optimal_accuracy", "optimal_loss", "optimal_data",
              "optimal_model_size", "optimal_training_steps", "total_benefit",
              "variable_cost", "fixed_cost", "shadow_price",
              "solver_converged", "full_feasible", "partial_feasible",
              "full_optimal", "partial_optimal", "notes"});
  auto fmt = CsvTable::format_double;
  auto opt_fmt = [&](double v, bool present) {
    return present ? fmt(v) : std::string();
  };
  for (const auto& o : outcomes) {
    const auto& d = o.decision;
    bool has_sol = d.solution.has_value();
    t.add_row({o.task.row.soc_code, o.task.row.task_id, o.task.row.dwa_id,
               o.task.row.naics, fmt(o.task.row.n_class),
               fmt(o.task.row.num_subtasks), fmt(o.task.econ.employees),
               opt_fmt(o.task.econ.wage, !o.task.wage_missing),
               fmt(o.task.econ.time_share), fmt(o.task.econ.vision_share),
               fmt(o.task.econ.h_task), fmt(o.task.econ.h_req),
               regime_name(d.regime), fmt(d.substitution_ratio),
               opt_fmt(d.optimal_accuracy, has_sol),
               opt_fmt(d.optimal_loss, !std::isnan(d.optimal_loss)),
               opt_fmt(has_sol ? d.solution->bundle.data : 0.0, has_sol),
               opt_fmt(has_sol ? d.solution->bundle.model_size : 0.0, has_sol),
               opt_fmt(has_sol ? d.solution->bundle.steps : 0.0, has_sol),
               fmt(d.total_benefit), fmt(d.variable_cost), fmt(d.fixed_cost),
               opt_fmt(has_sol ? d.solution->shadow_price : 0.0, has_sol),
               d.solver_converged ? "1" : "0",
               d.flags.full_feasible ? "1" : "0",
               d.flags.partial_feasible ? "1" : "0",
               d.flags.full_optimal ? "1" : "0",
               d.flags.partial_optimal ? "1" : "0", o.note});
  }
  return t;
}

// Reads a decisions table back into aggregation records.
inline std::vector<DecisionRecord> records_from_decisions_csv(
    const CsvTable& t) {
  std::vector<DecisionRecord> records;
  records.reserve(t.row_count());
  for (std::size_t i = 0; i < t.row_count(); ++i) {
    DecisionRecord r;
    r.occupation = t.cell(i, "soc_code");
    const std::string& regime = t.cell(i, "regime");
    if (regime == "full") {
      r.regime = Regime::kFull;
    } else if (regime == "partial") {
      r.regime = Regime::kPartial;
    } else if (regime == "none") {
      r.regime = Regime::kNone;
    } else {
      throw ParseError("unknown regime '" + regime + "'", i + 2);
    }
    r.substitution_ratio = t.cell_double(i, "replace_ratio");
    r.total_benefit = t.cell_double(i, "total_benefit");
    double wage = t.cell_double(i, "wage");
    r.wage = std::isnan(wage) ? 0.0 : wage;
    r.employees = t.cell_double(i, "employees");
    r.time_share = t.cell_double(i, "time_share");
    r.vision_share = t.cell_double(i, "vision_share");
    r.flags.full_feasible = t.cell_double(i, "full_feasible") != 0.0;
    r.flags.partial_feasible = t.cell_double(i, "partial_feasible") != 0.0;
    r.flags.full_optimal = t.cell_double(i, "full_optimal") != 0.0;
    r.flags.partial_optimal = t.cell_double(i, "partial_optimal") != 0.0;
    records.push_back(std::move(r));
  }
  return records;
}

inline CsvTable rejections_to_csv(const std::vector<Rejection>& rejections) {
  CsvTable t({"row_key", "reason"});
  for (const auto& r : rejections) t.add_row({r.key, r.reason});
  return t;
}

inline std::string summarize_run(const RunResult& result,
                                 const RunConfig& cfg) {
  std::vector<DecisionRecord> records;
  records.reserve(result.outcomes.size());
  std::size_t none = 0, partial = 0, full = 0;
  for (const auto& o : result.outcomes) {
    records.push_back(to_record(o));
    switch (o.decision.regime) {
      case Regime::kNone: ++none; break;
      case Regime::kPartial: ++partial; break;
      case Regime::kFull: ++full; break;
    }
  }
  std::ostringstream out;
  double npv = annuity_factors(cfg.cost_params).plain;
  out << "# benefit NPV convention: plain " << cfg.cost_params.lifespan_years
      << "-year annuity at rate " << cfg.cost_params.d << " (factor "
      << npv << ")\n";
  out << "rows_decided = " << result.decided << "\n";
  out << "rows_rejected = " << result.rejections.size() << "\n";
  out << "rows_non_converged = " << result.non_converged << "\n";
  out << "regime_none = " << none << "\n";
  out << "regime_partial = " << partial << "\n";
  out << "regime_full = " << full << "\n";
  if (!records.empty()) {
    out << "automation_rate = " << automation_rate(records) << "\n";
    AutomationRateOptions tau{true};
    out << "automation_rate_tau_weighted = " << automation_rate(records, tau)
        << "\n";
    ResidualDecomposition rd = residual_decomposition(records);
    out << "# decomposition below is in annual compensation flows (USD/yr); "
           "benefit sums are lifetime present values\n";
    out << "compensation_base = " << rd.compensation_base << "\n";
    out << "realized_savings = " << rd.realized_savings << "\n";
    out << "non_automatable = " << rd.non_automatable << "\n";
    out << "not_adopted = " << rd.not_adopted << "\n";
    out << "partial_residual = " << rd.partial_residual << "\n";
    CompensatedSum z_full, z_both, z_partial_only;
    for (const auto& r : records) {
      double realized = r.total_benefit * r.substitution_ratio;
      if (matches_condition(r, BenefitCondition::kFullOptimal)) {
        z_full.add(realized);
      }
      if (matches_condition(r, BenefitCondition::kPartialOptimalBothFeasible)) {
        z_both.add(realized);
      }
      if (matches_condition(r,
                            BenefitCondition::kPartialOptimalFullInfeasible)) {
        z_partial_only.add(realized);
      }
    }
    out << "benefit_full_optimal = " << z_full.value() << "\n";
    out << "benefit_partial_optimal_both_feasible = " << z_both.value()
        << "\n";
    out << "benefit_partial_optimal_full_infeasible = "
        << z_partial_only.value() << "\n";
  }
  return out.str();
}

// --- elasticity report -------------------------------------------------------

struct ElasticityScenario {
  std::string name;
  double data_per_class;  // scenario data columns are per-class counts
  double steps;
  double model_size;
};

inline const std::vector<ElasticityScenario>& elasticity_scenarios() {
  static const std::vector<ElasticityScenario> kScenarios = {
      {"small", 25000.0, 200000.0, 250000.0},
      {"medium", 100000.0, 1000000.0, 5000000.0}};
  return kScenarios;
}

struct ElasticityReference {
  double n;
  std::string scale;
  double r, eps_data, eps_steps, eps_model, total;
};

// Published reference values for the two scenario bundles.
inline const std::vector<ElasticityReference>& elasticity_reference_table() {
  static const std::vector<ElasticityReference> kRef = {
      {2, "small", 0.804, 0.010, 0.046, 0.046, 0.102},
      {2, "medium", 0.911, 0.009, 0.021, 0.007, 0.037},
      {5, "small", 0.866, 0.016, 0.035, 0.032, 0.083},
      {5, "medium", 0.960, 0.013, 0.016, 0.006, 0.034},
      {10, "small", 0.860, 0.016, 0.040, 0.034, 0.089},
      {10, "medium", 0.961, 0.012, 0.018, 0.006, 0.036},
      {50, "small", 0.771, 0.015, 0.080, 0.056, 0.151},
      {50, "medium", 0.925, 0.009, 0.032, 0.012, 0.052},
      {100, "small", 0.695, 0.015, 0.122, 0.078, 0.215},
      {100, "medium", 0.894, 0.007, 0.044, 0.017, 0.068},
      {500, "small", 0.351, 0.023, 0.544, 0.283, 0.849},
      {500, "medium", 0.751, 0.006, 0.112, 0.045, 0.163},
      {1000, "small", 0.080, 0.088, 3.459, 1.629, 5.176},
      {1000, "medium", 0.636, 0.006, 0.188, 0.075, 0.269}};
  return kRef;
}

struct ElasticityRow {
  double n = 0.0;
  std::string scale;
  std::string convention;
  double r = 0.0;
  double eps_data = 0.0, eps_steps = 0.0, eps_model = 0.0, total = 0.0;
  const ElasticityReference* reference = nullptr;
};

// Elasticities of the baseline-to-model loss gap at the two scenario
// bundles, for each class count, under both baseline-loss conventions:
// the maximum-entropy baseline ln(n) and the fitted map at chance accuracy.
// The substitution ratio column uses a zero required-loss endpoint.
inline std::vector<ElasticityRow> report_elasticities(
    const ScalingLawParams& law, const EntropyFitParams& entropy) {
  static const double kClassCounts[] = {2, 5, 10, 50, 100, 500, 1000};
  std::vector<ElasticityRow> rows;
  EvalOptions opt;
  opt.policy = RegimePolicy::kExtrapolate;
  for (auto convention : {HTaskConvention::kLogN, HTaskConvention::kEntropyMap}) {
    for (double n : kClassCounts) {
      for (const auto& scenario : elasticity_scenarios()) {
        InputBundle b;
        b.n_class = n;
        b.data = scenario.data_per_class * n;
        b.steps = scenario.steps;
        b.model_size = scenario.model_size;
        double h_task = convention == HTaskConvention::kLogN
                            ? std::log(n)
                            : entropy_from_accuracy(1.0 / n, n, entropy);
        ElasticityRow row;
        row.n = n;
        row.scale = scenario.name;
        row.convention =
            convention == HTaskConvention::kLogN ? "log_n" : "entropy_map";
        double loss = eval_loss(b, law, {}, opt);
        row.r = std::clamp((h_task - loss) / h_task, 0.0, 1.0);
        PerformanceElasticities e =
            performance_elasticities(b, law, h_task, {}, opt);
        row.eps_data = e.data;
        row.eps_steps = e.steps;
        row.eps_model = e.model;
        row.total = e.total();
        for (const auto& ref : elasticity_reference_table()) {
          if (ref.n == n && ref.scale == scenario.name) row.reference = &ref;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

inline CsvTable elasticity_report_to_csv(const std::vector<ElasticityRow>& rows) {
  CsvTable t({"n_class", "scale", "h_task_convention", "r", "eps_data",
              "eps_steps", "eps_model", "total", "ref_r", "ref_eps_data",
              "ref_eps_steps", "ref_eps_model", "ref_total", "dev_eps_data",
              "dev_eps_steps", "dev_eps_model"});
  auto fmt = CsvTable::format_double;
  for (const auto& r : rows) {
    std::vector<std::string> fields = {fmt(r.n),        r.scale,
                                       r.convention,    fmt(r.r),
                                       fmt(r.eps_data), fmt(r.eps_steps),
                                       fmt(r.eps_model), fmt(r.total)};
    if (r.reference) {
      const auto& ref = *r.reference;
      fields.push_back(fmt(ref.r));
      fields.push_back(fmt(ref.eps_data));
      fields.push_back(fmt(ref.eps_steps));
      fields.push_back(fmt(ref.eps_model));
      fields.push_back(fmt(ref.total));
      fields.push_back(fmt(r.eps_data / ref.eps_data - 1.0));
      fields.push_back(fmt(r.eps_steps / ref.eps_steps - 1.0));
      fields.push_back(fmt(r.eps_model / ref.eps_model - 1.0));
    } else {
      for (int i = 0; i < 8; ++i) fields.push_back("");
    }
    t.add_row(fields);
  }
  return t;
}

// --- coefficient recomputation report ----------------------------------------

struct CoefficientReport {
  ReducedCostCoefficients published;
  ReducedCostCoefficients table_expressions;  // closed forms, implied p_data
  ReducedCostCoefficients component_sums;     // literal component reduction
  double implied_p_data = 0.0;  // per-datum price that reproduces c_d
};

inline CoefficientReport coefficient_report(const CostParams& params) {
  CoefficientReport r;
  r.published = ReducedCostCoefficients::published_defaults(1.0);
  AnnuityFactors f = annuity_factors(params);
  r.implied_p_data = r.published.c_d / (1.0 + params.kappa_recur * f.plain);
  r.table_expressions = ReducedCostCoefficients::from_table_expressions(
      params, 1.0, r.implied_p_data);
  r.component_sums = ReducedCostCoefficients::from_components(
      params, 1.0, r.implied_p_data);
  return r;
}

inline std::string coefficient_report_text(const CoefficientReport& r) {
  std::ostringstream out;
  auto line = [&](const char* name, double pub, double table, double comp) {
    out << name << ": published = " << pub << ", closed-form = " << table
        << " (x" << table / pub << "), component-sum = " << comp << " (x"
        << comp / pub << ")\n";
  };
  out << "implied per-datum price from published c_D: " << r.implied_p_data
      << "\n";
  line("c_F", r.published.c_f, r.table_expressions.c_f, r.component_sums.c_f);
  line("c_D", r.published.c_d, r.table_expressions.c_d, r.component_sums.c_d);
  line("c_T", r.published.c_t, r.table_expressions.c_t, r.component_sums.c_t);
  line("c_I", r.published.c_i, r.table_expressions.c_i, r.component_sums.c_i);
  out << "published values remain the canonical defaults; nonzero gaps on "
         "c_T/c_I reflect the unit ambiguity of the GPU throughput inputs\n";
  return out.str();
}

// --- synthetic fixtures -------------------------------------------------------

struct FixtureOptions {
  std::size_t rows = 500;  // merged (task x industry) row count
  std::uint64_t seed = 7;
  int anchor_count = 8;  // scale-sensitive tasks with spread employment
  int industries_per_occupation = 2;
};

struct TaskFixture {
  CsvTable survey{{"soc_code", "task_id", "dwa_id", "required_error",
                   "random_guess_error", "judgment_freq", "dwa_time_share",
                   "importance_score"}};
  CsvTable complexity{
      {"soc_code", "task_id", "dwa_id", "n_class", "num_tasks",
       "vision_share"}};
  CsvTable wages{{"soc_code", "naics", "wage", "employees"}};
};

// Synthetic survey/complexity/wage tables. Rows are valid by construction;
// each occupation code carries `industries_per_occupation` wage rows with
// its employment split across them, so every survey row merges to that many
// (occupation x industry) rows and pooled deployment has something to pool.
// A block of anchor tasks with identical economics but employment spread
// over two and a half decades guarantees scale-sensitive regime transitions.
inline TaskFixture generate_task_fixture(const FixtureOptions& opt = {}) {
  TaskFixture fx;
  Rng rng(opt.seed);
  auto fmt = CsvTable::format_double;
  std::size_t task_counter = 0;
  std::size_t merged_rows = 0;
  std::string current_soc;
  const int industries = std::max(1, opt.industries_per_occupation);
  auto add_task = [&](const std::string& soc, double n_class,
                      double num_tasks, double vision_share,
                      double required_error, double random_guess_error,
                      double judgment_freq, double dwa_time_share,
                      double importance, double wage, double employees) {
    std::string task = "T" + std::to_string(10000 + task_counter);
    std::string dwa = "D" + std::to_string(20000 + task_counter);
    if (soc != current_soc) {
      // Employment split across industries with a fixed descending profile.
      double remaining = 1.0;
      for (int j = 0; j < industries; ++j) {
        double share = j + 1 == industries ? remaining : remaining * 0.6;
        remaining -= share;
        std::string naics =
            std::to_string(3100 + (task_counter % 40)) + std::to_string(j);
        fx.wages.add_row({soc, naics, fmt(wage), fmt(employees * share)});
      }
      current_soc = soc;
    }
    ++task_counter;
    merged_rows += industries;
    fx.survey.add_row({soc, task, dwa, fmt(required_error),
                       fmt(random_guess_error), fmt(judgment_freq),
                       fmt(dwa_time_share), fmt(importance)});
    fx.complexity.add_row(
        {soc, task, dwa, fmt(n_class), fmt(num_tasks), fmt(vision_share)});
  };

  // Anchors: binary tasks with a demanding accuracy target, one occupation
  // each, employment from 8 upward. The small ones sit below the fixed-cost
  // hurdle, the middle ones land partial, the large ones full; employment
  // sweeps shift each up.
  for (int i = 0; i < opt.anchor_count && merged_rows < opt.rows; ++i) {
    double employees = 8.0 * std::pow(2.2, i);
    add_task("55-" + std::to_string(3000 + i), 2, 1, 0.8, 0.01, 0.50, 1e6,
             0.4, 0.75, 60000.0, employees);
  }
  double wage = 60000.0, employees = 100.0;
  while (merged_rows < opt.rows) {
    std::string soc = "11-" + std::to_string(1000 + task_counter / 4);
    if (task_counter % 4 == 0) {
      wage = rng.uniform(30000.0, 120000.0);
      employees = rng.log_uniform(5.0, 5e4);
    }
    double n_class = 2.0 + std::floor(rng.uniform(0.0, 11.0));
    double num_tasks = 1.0 + std::floor(rng.uniform(0.0, 3.0));
    double vision_share = rng.uniform(0.1, 0.9);
    double random_guess_error = 1.0 - 1.0 / n_class;
    if (rng.uniform01() < 0.3) {
      random_guess_error *= rng.uniform(0.85, 1.0);
    }
    double required_error =
        std::max(rng.uniform(0.02, 0.5) * random_guess_error, 0.005);
    // Keep the per-subtask target above chance.
    double a_req = 1.0 - required_error / num_tasks;
    if (a_req <= 1.0 / n_class + 0.02) continue;
    double judgment_freq = rng.log_uniform(1e4, 1e7);
    double dwa_time_share = rng.uniform(0.05, 0.5);
    double importance = rng.uniform(0.3, 1.0);
    add_task(soc, n_class, num_tasks, vision_share, required_error,
             random_guess_error, judgment_freq, dwa_time_share, importance,
             wage, employees);
  }
  return fx;
}

// Default coarse firm-size bins with counts shaped like published business
// statistics.
inline CsvTable generate_bins_fixture() {
  CsvTable t({"bin_lower", "bin_upper", "firm_count"});
  const double lowers[] = {1, 5, 10, 20, 100, 500, 1000, 2500, 5000, 10000};
  const double uppers[] = {4, 9, 19, 99, 499, 999, 2499, 4999, 9999, -1};
  const double counts[] = {2.0e6, 1.0e6, 6.0e5, 7.0e5, 9.0e4,
                           1.0e4, 6.0e3, 2.0e3, 1.0e3, 1.0e3};
  auto fmt = CsvTable::format_double;
  for (int i = 0; i < 10; ++i) {
    t.add_row({fmt(lowers[i]), uppers[i] < 0 ? "" : fmt(uppers[i]),
               fmt(counts[i])});
  }
  return t;
}

}  // namespace autoecon
