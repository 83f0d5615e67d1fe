// Command-line runner for the task-automation cost model: scaling-law
// fitting, synthetic data, row-level automation decisions, aggregation,
// elasticity and price-coefficient reports.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "autoecon/aggregation.hpp"
#include "autoecon/pipeline.hpp"
#include "autoecon/scaling_fit.hpp"

namespace fs = std::filesystem;
using namespace autoecon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitSolverError = 3;

struct CommonArgs {
  std::string config_path;
  std::string cost_mode = "reduced";
  std::string deployment = "firm";
  std::string pool_key = "occ_task";
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  double scale_employment = 1.0;
};

RunConfig make_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = load_run_config(args.config_path);
  if (args.cost_mode == "reduced") {
    cfg.cost_mode = CostMode::kReduced;
  } else if (args.cost_mode == "structural") {
    cfg.cost_mode = CostMode::kStructural;
  } else {
    throw ParseError("--cost-mode must be 'reduced' or 'structural'");
  }
  if (args.deployment == "firm") {
    cfg.deployment = Deployment::kFirm;
  } else if (args.deployment == "pooled") {
    cfg.deployment = Deployment::kPooled;
  } else {
    throw ParseError("--deployment must be 'firm' or 'pooled'");
  }
  if (args.pool_key == "occ_task") {
    cfg.pool_key = PoolKey::kOccupationTask;
  } else if (args.pool_key == "occ_task_naics") {
    cfg.pool_key = PoolKey::kOccupationTaskNaics;
  } else {
    throw ParseError("--pool-key must be 'occ_task' or 'occ_task_naics'");
  }
  cfg.seed = args.seed;
  cfg.employment_multiplier *= args.scale_employment;
  return cfg;
}

fs::path ensure_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot write '" + path.string() + "'");
  f << text;
}

int cmd_fit(const CommonArgs& args, const std::string& obs_path) {
  RunConfig cfg = make_config(args);
  cfg.fit.split_seed = args.seed;
  auto obs = observations_from_csv(CsvTable::load(obs_path));
  FitResult result;
  try {
    result = fit_scaling_law(obs, cfg.fit);
  } catch (const FitFailedError& e) {
    std::cerr << "fit failed: " << e.what() << "\n";
    return kExitSolverError;
  }
  fs::path out = ensure_out_dir(args.out_dir);
  fit_result_to_kv(result).save((out / "scaling_fit.txt").string());
  std::cout << "fitted " << obs.size() << " observations: train_r2 = "
            << result.train_r2 << ", test_r2 = " << result.test_r2 << "\n"
            << "wrote " << (out / "scaling_fit.txt").string() << "\n";
  return kExitOk;
}

int cmd_synth_observations(const CommonArgs& args, double noise_sd,
                           int replicates) {
  RunConfig cfg = make_config(args);
  auto design = default_experiment_design();
  auto obs = generate_synthetic_observations(cfg.law, design, noise_sd,
                                             replicates, args.seed);
  fs::path out = ensure_out_dir(args.out_dir);
  observations_to_csv(obs).save((out / "observations.csv").string());
  std::cout << "wrote " << obs.size() << " observations to "
            << (out / "observations.csv").string() << "\n";
  return kExitOk;
}

int cmd_synth_tasks(const CommonArgs& args, std::size_t rows) {
  FixtureOptions opt;
  opt.rows = rows;
  opt.seed = args.seed;
  TaskFixture fx = generate_task_fixture(opt);
  fs::path out = ensure_out_dir(args.out_dir);
  fx.survey.save((out / "survey.csv").string());
  fx.complexity.save((out / "complexity.csv").string());
  fx.wages.save((out / "wages.csv").string());
  std::cout << "wrote " << fx.survey.row_count() << " fixture rows to "
            << out.string() << "\n";
  return kExitOk;
}

int cmd_synth_bins(const CommonArgs& args) {
  fs::path out = ensure_out_dir(args.out_dir);
  generate_bins_fixture().save((out / "bins.csv").string());
  std::cout << "wrote " << (out / "bins.csv").string() << "\n";
  return kExitOk;
}

int cmd_optimize(const CommonArgs& args, const std::string& survey_path,
                 const std::string& complexity_path,
                 const std::string& wages_path,
                 const std::string& params_path) {
  RunConfig cfg = make_config(args);
  if (!params_path.empty()) {
    cfg.law = scaling_params_from_kv(KeyValueFile::load(params_path));
  }
  IngestResult ingest = ingest_and_merge(CsvTable::load(survey_path),
                                         CsvTable::load(complexity_path),
                                         CsvTable::load(wages_path));
  for (const auto& w : ingest.warnings) std::cerr << "warning: " << w << "\n";
  RunResult result = run_decisions(ingest.rows, cfg);
  result.rejections.insert(result.rejections.begin(),
                           ingest.rejections.begin(), ingest.rejections.end());

  fs::path out = ensure_out_dir(args.out_dir);
  decisions_to_csv(result.outcomes).save((out / "decisions.csv").string());
  rejections_to_csv(result.rejections)
      .save((out / "rejections.csv").string());
  write_text(out / "summary.txt", summarize_run(result, cfg));

  std::vector<DecisionRecord> records;
  for (const auto& o : result.outcomes) records.push_back(to_record(o));
  if (!records.empty()) {
    rollups_to_csv(occupation_rollups(records))
        .save((out / "occupation_rollups.csv").string());
  }
  std::cout << "decided " << result.decided << " rows ("
            << result.rejections.size() << " rejected, "
            << result.non_converged << " non-converged); outputs in "
            << out.string() << "\n";
  if (result.decided > 0 &&
      static_cast<double>(result.non_converged) >
          0.01 * static_cast<double>(result.decided)) {
    std::cerr << "more than 1% of rows failed the solver cross-check\n";
    return kExitSolverError;
  }
  return kExitOk;
}

int cmd_aggregate(const CommonArgs& args, const std::string& decisions_path,
                  const std::string& bins_path,
                  const std::string& subsector_emp_path,
                  const std::string& occupation_emp_path, double max_size) {
  fs::path out = ensure_out_dir(args.out_dir);
  if (!decisions_path.empty()) {
    auto records = records_from_decisions_csv(CsvTable::load(decisions_path));
    rollups_to_csv(occupation_rollups(records))
        .save((out / "occupation_rollups.csv").string());
    ResidualDecomposition rd = residual_decomposition(records);
    std::ostringstream s;
    s << "automation_rate = " << automation_rate(records) << "\n";
    AutomationRateOptions tau{true};
    s << "automation_rate_tau_weighted = " << automation_rate(records, tau)
      << "\n";
    s << "compensation_base = " << rd.compensation_base << "\n";
    s << "realized_savings = " << rd.realized_savings << "\n";
    s << "non_automatable = " << rd.non_automatable << "\n";
    s << "not_adopted = " << rd.not_adopted << "\n";
    s << "partial_residual = " << rd.partial_residual << "\n";
    write_text(out / "aggregate_summary.txt", s.str());
    std::cout << s.str();
  }
  if (!bins_path.empty()) {
    auto coarse = coarse_bins_from_csv(CsvTable::load(bins_path));
    auto fine = impute_fine_sizes(coarse, max_size);
    fine_sizes_to_csv(fine).save((out / "fine_sizes.csv").string());
    std::cout << "wrote " << fine.size() << " fine size points\n";
    if (!subsector_emp_path.empty() && !occupation_emp_path.empty()) {
      CsvTable sub = CsvTable::load(subsector_emp_path);
      CsvTable occ = CsvTable::load(occupation_emp_path);
      std::map<std::string, FineFirmSizeDistribution> dists;
      std::map<std::string, double> sub_emp;
      for (std::size_t i = 0; i < sub.row_count(); ++i) {
        std::string naics = sub.cell(i, "naics");
        sub_emp[naics] = sub.cell_double(i, "employees");
        dists[naics] = fine;  // one published distribution per subsector
      }
      std::map<std::string, std::map<std::string, double>> occ_emp;
      for (std::size_t i = 0; i < occ.row_count(); ++i) {
        occ_emp[occ.cell(i, "soc_code")][occ.cell(i, "naics")] =
            occ.cell_double(i, "employees");
      }
      CsvTable t({"soc_code", "size", "firm_count"});
      for (const auto& [soc, emp] : occ_emp) {
        auto dist = occupation_size_distribution(dists, sub_emp, emp);
        for (const auto& p : dist) {
          t.add_row({soc, CsvTable::format_double(p.size),
                     CsvTable::format_double(p.firm_count)});
        }
      }
      t.save((out / "occupation_sizes.csv").string());
      std::cout << "wrote occupation size distributions for "
                << occ_emp.size() << " occupations\n";
    }
  }
  return kExitOk;
}

int cmd_elasticity(const CommonArgs& args, const std::string& params_path) {
  RunConfig cfg = make_config(args);
  if (!params_path.empty()) {
    cfg.law = scaling_params_from_kv(KeyValueFile::load(params_path));
  }
  auto rows = report_elasticities(cfg.law, cfg.entropy);
  fs::path out = ensure_out_dir(args.out_dir);
  elasticity_report_to_csv(rows).save((out / "elasticity.csv").string());
  std::printf("%6s %-7s %-11s %8s %8s %8s %8s %8s\n", "n", "scale", "h_task",
              "r", "eps_D", "eps_T", "eps_M", "total");
  for (const auto& r : rows) {
    std::printf("%6.0f %-7s %-11s %8.3f %8.3f %8.3f %8.3f %8.3f\n", r.n,
                r.scale.c_str(), r.convention.c_str(), r.r, r.eps_data,
                r.eps_steps, r.eps_model, r.total);
  }
  std::cout << "wrote " << (out / "elasticity.csv").string() << "\n";
  return kExitOk;
}

int cmd_coeffs(const CommonArgs& args) {
  RunConfig cfg = make_config(args);
  CoefficientReport report = coefficient_report(cfg.cost_params);
  std::string text = coefficient_report_text(report);
  fs::path out = ensure_out_dir(args.out_dir);
  write_text(out / "coefficients.txt", text);
  std::cout << text;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"task-level AI automation cost model"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "key-value config file");
    cmd->add_option("--cost-mode", args.cost_mode, "reduced|structural");
    cmd->add_option("--deployment", args.deployment, "firm|pooled");
    cmd->add_option("--pool-key", args.pool_key, "occ_task|occ_task_naics");
    cmd->add_option("--seed", args.seed, "random seed");
    cmd->add_option("--out", args.out_dir, "output directory");
  };

  std::string obs_path, survey_path, complexity_path, wages_path;
  std::string params_path, decisions_path, bins_path;
  std::string subsector_emp_path, occupation_emp_path;
  double noise_sd = 0.01, max_size = 2e6;
  int replicates = 50;
  std::size_t fixture_rows = 500;

  CLI::App* fit = app.add_subcommand("fit", "fit the loss surface to observations");
  add_common(fit);
  fit->add_option("--obs", obs_path, "observation CSV")->required();

  CLI::App* synth = app.add_subcommand("synth", "generate synthetic inputs");
  CLI::App* synth_obs =
      synth->add_subcommand("observations", "surface-generated observations");
  add_common(synth_obs);
  synth_obs->add_option("--noise-sd", noise_sd, "log-loss noise sd");
  synth_obs->add_option("--replicates", replicates, "replicates per config");
  CLI::App* synth_tasks =
      synth->add_subcommand("tasks", "survey/complexity/wage fixture");
  add_common(synth_tasks);
  synth_tasks->add_option("--rows", fixture_rows, "fixture row count");
  CLI::App* synth_bins =
      synth->add_subcommand("bins", "coarse firm-size bins fixture");
  add_common(synth_bins);
  synth->require_subcommand(1);

  CLI::App* optimize =
      app.add_subcommand("optimize", "row-level automation decisions");
  add_common(optimize);
  optimize->add_option("--survey", survey_path, "survey CSV")->required();
  optimize->add_option("--complexity", complexity_path, "complexity CSV")
      ->required();
  optimize->add_option("--wages", wages_path, "wage/employment CSV")
      ->required();
  optimize->add_option("--params", params_path, "fitted surface constants");
  optimize->add_option("--scale-employment", args.scale_employment,
                       "multiply employment by this factor");

  CLI::App* aggregate =
      app.add_subcommand("aggregate", "rollups, rates, firm sizes");
  add_common(aggregate);
  aggregate->add_option("--decisions", decisions_path, "decisions CSV");
  aggregate->add_option("--bins", bins_path, "coarse firm-size bins CSV");
  aggregate->add_option("--subsector-emp", subsector_emp_path,
                        "subsector employment CSV (naics,employees)");
  aggregate->add_option("--occ-emp", occupation_emp_path,
                        "occupation employment CSV (soc_code,naics,employees)");
  aggregate->add_option("--max-size", max_size, "largest firm size");

  CLI::App* elasticity =
      app.add_subcommand("elasticity", "scenario elasticity report");
  add_common(elasticity);
  elasticity->add_option("--params", params_path, "fitted surface constants");

  CLI::App* coeffs =
      app.add_subcommand("coeffs", "price-coefficient recomputation report");
  add_common(coeffs);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return cmd_fit(args, obs_path);
    if (synth->parsed()) {
      if (synth_obs->parsed())
        return cmd_synth_observations(args, noise_sd, replicates);
      if (synth_tasks->parsed()) return cmd_synth_tasks(args, fixture_rows);
      if (synth_bins->parsed()) return cmd_synth_bins(args);
    }
    if (optimize->parsed()) {
      return cmd_optimize(args, survey_path, complexity_path, wages_path,
                          params_path);
    }
    if (aggregate->parsed()) {
      return cmd_aggregate(args, decisions_path, bins_path, subsector_emp_path,
                           occupation_emp_path, max_size);
    }
    if (elasticity->parsed()) return cmd_elasticity(args, params_path);
    if (coeffs->parsed()) return cmd_coeffs(args);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
