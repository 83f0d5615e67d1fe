#include "autoecon/aggregation.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "autoecon/rng.hpp"

using namespace autoecon;
using Catch::Approx;

namespace {

CoarseFirmSizeBins standard_bins() {
  CoarseFirmSizeBins bins;
  const double lowers[] = {1, 5, 10, 20, 100, 500, 1000, 2500, 5000, 10000};
  const double uppers[] = {4, 9, 19, 99, 499, 999, 2499, 4999, 9999, -1};
  const double counts[] = {2.0e6, 1.0e6, 6.0e5, 7.0e5, 9.0e4,
                           1.0e4, 6.0e3, 2.0e3, 1.0e3, 1.0e3};
  for (int i = 0; i < 10; ++i) {
    CoarseFirmSizeBin b;
    b.lower = lowers[i];
    if (uppers[i] > 0) b.upper = uppers[i];
    b.firm_count = counts[i];
    bins.bins.push_back(b);
  }
  return bins;
}

DecisionRecord record(const std::string& occ, Regime regime, double r,
                      double wage, double employees, double tau,
                      double delta) {
  DecisionRecord d;
  d.occupation = occ;
  d.regime = regime;
  d.substitution_ratio = r;
  d.wage = wage;
  d.employees = employees;
  d.time_share = tau;
  d.vision_share = delta;
  d.total_benefit = wage * employees * tau * delta;  // unit npv for tests
  return d;
}

}  // namespace

TEST_CASE("closed bins split evenly on the log scale") {
  CoarseFirmSizeBins bins;
  bins.bins.push_back({20.0, 99.0, 100.0});
  bins.bins.push_back({10000.0, std::nullopt, 50.0});
  FineFirmSizeDistribution fine = impute_fine_sizes(bins, 2e6);
  REQUIRE(fine.size() == 10 + 30);
  double prev = 0.0;
  for (int i = 0; i < 10; ++i) {
    CHECK(fine[i].firm_count == Approx(10.0));
    CHECK(fine[i].size > prev);  // geometric midpoints ascend
    CHECK(fine[i].size >= 20.0);
    CHECK(fine[i].size <= 99.0);
    prev = fine[i].size;
  }
}

TEST_CASE("imputation conserves bin masses") {
  CoarseFirmSizeBins bins = standard_bins();
  FineFirmSizeDistribution fine = impute_fine_sizes(bins, 2e6);
  double coarse_total = 0.0;
  for (const auto& b : bins.bins) coarse_total += b.firm_count;
  CHECK(total_firm_count(fine) == Approx(coarse_total).epsilon(1e-12));

  // Per-bin conservation.
  std::size_t idx = 0;
  for (const auto& b : bins.bins) {
    std::size_t k = b.upper ? 10 : 30;
    double mass = 0.0;
    for (std::size_t i = 0; i < k; ++i) mass += fine[idx++].firm_count;
    CHECK(mass == Approx(b.firm_count).epsilon(1e-12));
  }
}

TEST_CASE("open bin extends with a log-log slope of -1") {
  CoarseFirmSizeBins bins = standard_bins();
  FineFirmSizeDistribution fine = impute_fine_sizes(bins, 2e6);
  // Tail points are the last 30; least-squares slope of ln(count) on ln(size).
  std::size_t start = fine.size() - 30;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = start; i < fine.size(); ++i) {
    double x = std::log(fine[i].size);
    double y = std::log(fine[i].firm_count);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double k = 30.0;
  double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  CHECK(slope == Approx(-1.0).margin(0.01));
  CHECK(fine.back().size == Approx(2e6));
}

TEST_CASE("imputation input guards") {
  CoarseFirmSizeBins empty;
  CHECK_THROWS_AS(impute_fine_sizes(empty, 2e6), DomainError);
  CHECK_THROWS_AS(impute_fine_sizes(standard_bins(), 5000.0), DomainError);
  CoarseFirmSizeBins overlapping = standard_bins();
  overlapping.bins[1].lower = 2.0;
  CHECK_THROWS_AS(impute_fine_sizes(overlapping, 2e6), DomainError);
}

TEST_CASE("occupation size distribution: identity, rescale, additivity") {
  FineFirmSizeDistribution base =
      impute_fine_sizes(standard_bins(), 2e6);

  // Single subsector employing only this occupation: exact pass-through.
  std::map<std::string, FineFirmSizeDistribution> dists{{"3100", base}};
  std::map<std::string, double> sub_emp{{"3100", 1000.0}};
  std::map<std::string, double> occ_emp{{"3100", 1000.0}};
  FineFirmSizeDistribution same =
      occupation_size_distribution(dists, sub_emp, occ_emp);
  REQUIRE(same.size() == base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(same[i].size == base[i].size);
    CHECK(same[i].firm_count == base[i].firm_count);
  }

  // Half the employment: sizes halve, counts carry over.
  occ_emp["3100"] = 500.0;
  FineFirmSizeDistribution halved =
      occupation_size_distribution(dists, sub_emp, occ_emp);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(halved[i].size == Approx(base[i].size * 0.5));
    CHECK(halved[i].firm_count == base[i].firm_count);
  }

  // Two subsectors: total counts add.
  dists["5415"] = base;
  sub_emp["5415"] = 2000.0;
  std::map<std::string, double> occ2{{"3100", 600.0}, {"5415", 800.0}};
  FineFirmSizeDistribution merged =
      occupation_size_distribution(dists, sub_emp, occ2);
  CHECK(total_firm_count(merged) ==
        Approx(2.0 * total_firm_count(base)).epsilon(1e-9));

  std::map<std::string, double> missing{{"9999", 10.0}};
  CHECK_THROWS_AS(occupation_size_distribution(dists, sub_emp, missing),
                  DomainError);
}

TEST_CASE("occupation benefit sums per condition class") {
  std::vector<DecisionRecord> ds;
  auto full = record("A", Regime::kFull, 1.0, 50000, 10, 0.3, 0.8);
  full.flags = {true, true, true, false};
  auto partial_both = record("A", Regime::kPartial, 0.5, 60000, 20, 0.2, 0.5);
  partial_both.flags = {true, true, false, true};
  auto partial_only = record("A", Regime::kPartial, 0.4, 40000, 5, 0.1, 0.9);
  partial_only.flags = {false, true, false, true};
  auto none = record("A", Regime::kNone, 0.0, 30000, 50, 0.2, 0.3);
  ds = {full, partial_both, partial_only, none};

  CHECK(occupation_benefit(ds, "B", BenefitCondition::kFullOptimal) == 0.0);
  CHECK(occupation_benefit(ds, "A", BenefitCondition::kFullOptimal) ==
        Approx(full.total_benefit));
  CHECK(occupation_benefit(ds, "A",
                           BenefitCondition::kPartialOptimalBothFeasible) ==
        Approx(partial_both.total_benefit * 0.5));
  CHECK(occupation_benefit(ds, "A",
                           BenefitCondition::kPartialOptimalFullInfeasible) ==
        Approx(partial_only.total_benefit * 0.4));

  // The three classes partition all realized savings.
  double realized = 0.0;
  for (const auto& d : ds) realized += d.total_benefit * d.substitution_ratio;
  double classes =
      occupation_benefit(ds, "A", BenefitCondition::kFullOptimal) +
      occupation_benefit(ds, "A",
                         BenefitCondition::kPartialOptimalBothFeasible) +
      occupation_benefit(ds, "A",
                         BenefitCondition::kPartialOptimalFullInfeasible);
  CHECK(classes == Approx(realized));
}

TEST_CASE("automation rate weighting") {
  std::vector<DecisionRecord> ds;
  CHECK_THROWS_AS(automation_rate(ds), ZeroDenominatorError);

  ds.push_back(record("A", Regime::kNone, 0.0, 50000, 10, 0.5, 0.8));
  CHECK(automation_rate(ds) == 0.0);

  // Single task: rate = r * tau under the published weighting.
  ds[0] = record("A", Regime::kPartial, 0.5, 50000, 10, 0.4, 0.8);
  CHECK(automation_rate(ds) == Approx(0.5 * 0.4));
  AutomationRateOptions tau_weighted{true};
  CHECK(automation_rate(ds, tau_weighted) == Approx(0.5));

  // Full automation of all work time.
  ds[0] = record("A", Regime::kFull, 1.0, 50000, 10, 1.0, 1.0);
  ds.push_back(record("B", Regime::kFull, 1.0, 70000, 3, 1.0, 1.0));
  CHECK(automation_rate(ds) == Approx(1.0));
}

TEST_CASE("residual decomposition reconstructs the compensation base") {
  Rng rng(19);
  std::vector<DecisionRecord> ds;
  for (int i = 0; i < 200; ++i) {
    Regime regime = i % 3 == 0   ? Regime::kNone
                    : i % 3 == 1 ? Regime::kPartial
                                 : Regime::kFull;
    double r = regime == Regime::kNone      ? 0.0
               : regime == Regime::kPartial ? rng.uniform(0.01, 0.99)
                                            : 1.0;
    ds.push_back(record(i % 2 ? "A" : "B", regime, r,
                        rng.uniform(2e4, 2e5), rng.uniform(1, 1e4),
                        rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)));
  }
  ResidualDecomposition rd = residual_decomposition(ds);
  double reconstructed = rd.non_automatable + rd.not_adopted +
                         rd.partial_residual + rd.realized_savings;
  CHECK(reconstructed == Approx(rd.compensation_base).epsilon(1e-9));

  // Everything automatable and fully automated: no residual shares.
  std::vector<DecisionRecord> all_full;
  for (int i = 0; i < 5; ++i) {
    all_full.push_back(record("A", Regime::kFull, 1.0, 5e4, 10, 0.5, 1.0));
  }
  ResidualDecomposition full_rd = residual_decomposition(all_full);
  CHECK(full_rd.non_automatable == 0.0);
  CHECK(full_rd.not_adopted == 0.0);
  CHECK(full_rd.partial_residual == 0.0);
  CHECK(full_rd.realized_savings == Approx(full_rd.compensation_base));

  // Nothing adopted: savings zero, the rest covers the base.
  std::vector<DecisionRecord> all_none;
  for (int i = 0; i < 5; ++i) {
    all_none.push_back(record("A", Regime::kNone, 0.0, 5e4, 10, 0.5, 0.7));
  }
  ResidualDecomposition none_rd = residual_decomposition(all_none);
  CHECK(none_rd.realized_savings == 0.0);
  CHECK(none_rd.not_adopted + none_rd.non_automatable ==
        Approx(none_rd.compensation_base));
}

TEST_CASE("occupation rollups aggregate per occupation") {
  std::vector<DecisionRecord> ds;
  auto a_full = record("A", Regime::kFull, 1.0, 50000, 10, 0.3, 0.8);
  a_full.flags = {true, true, true, false};
  auto b_partial = record("B", Regime::kPartial, 0.6, 60000, 20, 0.2, 0.5);
  b_partial.flags = {false, true, false, true};
  ds = {a_full, b_partial};
  auto rollups = occupation_rollups(ds);
  REQUIRE(rollups.size() == 2);
  CHECK(rollups[0].occupation == "A");
  CHECK(rollups[0].full_optimal_benefit == Approx(a_full.total_benefit));
  CHECK(rollups[0].rate == Approx(0.3));
  CHECK(rollups[1].partial_optimal_full_infeasible_benefit ==
        Approx(b_partial.total_benefit * 0.6));

  CsvTable t = rollups_to_csv(rollups);
  CHECK(t.row_count() == 2);
  CHECK(t.cell(0, "occupation") == "A");
}

TEST_CASE("bins CSV round trip") {
  CsvTable t({"bin_lower", "bin_upper", "firm_count"});
  t.add_row({"1", "4", "100"});
  t.add_row({"5", "9", "50"});
  t.add_row({"10000", "", "7"});
  CoarseFirmSizeBins bins = coarse_bins_from_csv(t);
  REQUIRE(bins.bins.size() == 3);
  CHECK(bins.bins[0].upper.value() == 4.0);
  CHECK_FALSE(bins.bins[2].upper.has_value());
  CHECK(bins.bins[2].firm_count == 7.0);
}
