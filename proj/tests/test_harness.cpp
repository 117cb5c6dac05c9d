#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "sparsebound/harness.hpp"

using namespace sparsebound;
using nlohmann::json;

namespace {

ExperimentConfig gt_config(std::uint64_t t, std::uint64_t trials) {
  ExperimentConfig c;
  c.n = 8;
  c.k = 2;
  c.model = {"group_testing", 0.0, 1.0};
  c.strategy.type = "bernoulli";
  c.strategy.p = 0.5;
  c.t_values = {t};
  c.trials = trials;
  c.seed = {2024};
  return c;
}

json without_wall_time(json j) {
  j.erase("wall_time_seconds");
  return j;
}

}  // namespace

TEST(Wilson, ContainsEstimateAndBehavesAtEdges) {
  for (std::uint64_t n : {1, 10, 2000}) {
    for (std::uint64_t e = 0; e <= n; e += std::max<std::uint64_t>(1, n / 7)) {
      const auto w = wilson_interval(e, n);
      const double p = static_cast<double>(e) / n;
      EXPECT_LE(w.lo, p + 1e-15);
      EXPECT_GE(w.hi, p - 1e-15);
      EXPECT_GE(w.lo, 0.0);
      EXPECT_LE(w.hi, 1.0);
    }
  }
  const auto zero = wilson_interval(0, 100);
  EXPECT_EQ(zero.lo, 0.0);
  EXPECT_GT(zero.hi, 0.03);
  // Textbook value: 20/100 gives [0.1334, 0.2888].
  const auto w = wilson_interval(20, 100);
  EXPECT_NEAR(w.lo, 0.1334, 1e-4);
  EXPECT_NEAR(w.hi, 0.2888, 1e-4);
}

TEST(RunTrials, AmpleMeasurementsGiveSmallError) {
  const auto r = run_trials(gt_config(30, 2000));
  ASSERT_EQ(r.rows.size(), 1U);
  EXPECT_LT(r.rows[0].empirical_pe, 0.01);
}

TEST(RunTrials, SingleTestRespectsFano) {
  const auto r = run_trials(gt_config(1, 2000));
  const auto& row = r.rows[0];
  EXPECT_NEAR(row.mi_used.value, 0.56234, 1e-5);
  EXPECT_EQ(row.mi_used.method, MiMethod::kExactEnumeration);
  EXPECT_NEAR(row.fano_bound, 0.623, 1e-3);
  EXPECT_GE(row.empirical_pe, row.fano_bound - 3 * row.pe_interval.half_width);
  EXPECT_EQ(row.empirical_pe, static_cast<double>(row.error_count) / row.trials);
  EXPECT_LE(row.error_count, row.trials);
  EXPECT_LE(row.pe_interval.lo, row.empirical_pe);
  EXPECT_GE(row.pe_interval.hi, row.empirical_pe);
}

TEST(RunTrials, DeterministicAcrossRunsAndWorkerCounts) {
  const auto c = gt_config(4, 300);
  setenv("SPARSEBOUND_WORKERS", "1", 1);
  const auto a = without_wall_time(to_json(run_trials(c)));
  setenv("SPARSEBOUND_WORKERS", "3", 1);
  const auto b = without_wall_time(to_json(run_trials(c)));
  unsetenv("SPARSEBOUND_WORKERS");
  EXPECT_EQ(a.dump(), b.dump());
  auto one = gt_config(3, 1);
  EXPECT_EQ(without_wall_time(to_json(run_trials(one))).dump(),
            without_wall_time(to_json(run_trials(one))).dump());
}

TEST(RunTrials, ReportCarriesSeedsAndMetadata) {
  const auto j = to_json(run_trials(gt_config(2, 50)));
  EXPECT_EQ(j["rows"][0]["seed"], 2024);
  EXPECT_EQ(j["units"], "nats");
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16U);
  EXPECT_TRUE(j.contains("version"));
  EXPECT_TRUE(j.contains("kernel_isa"));
}

TEST(Sweep, ErrorIsRoughlyNonincreasingInT) {
  auto c = gt_config(1, 800);
  c.t_values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto r = sweep(c);
  ASSERT_EQ(r.rows.size(), 10U);
  for (std::size_t i = 0; i < r.rows.size(); ++i) EXPECT_EQ(r.rows[i].seed.value, 2024 + i);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const auto& prev = r.rows[i - 1];
    const auto& cur = r.rows[i];
    EXPECT_LE(cur.empirical_pe,
              prev.empirical_pe + 3 * (prev.pe_interval.half_width + cur.pe_interval.half_width));
  }
  const std::string csv = to_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
}

TEST(Sweep, LinearSnrRowsCarryFeasibility) {
  ExperimentConfig c;
  c.n = 16;
  c.k = 2;
  c.model = {"linear_cs", 0.0, 1.0};
  c.strategy.type = "gaussian";
  c.t_values = {6};
  c.snr_values = {0.5, 5.0, 50.0};
  c.trials = 40;
  c.seed = {1};
  const auto r = sweep(c);
  ASSERT_EQ(r.rows.size(), 3U);
  for (const auto& row : r.rows) {
    ASSERT_TRUE(row.cs_feasible.has_value());
    ASSERT_TRUE(row.snr.has_value());
    EXPECT_EQ(*row.cs_feasible, cs_feasibility(6, *row.snr, 16, 2, c.bound_form).feasible);
    EXPECT_EQ(row.mi_used.method, MiMethod::kClosedForm);
  }
}

TEST(RunTrials, RevealedSubsetUsesItsOwnBoundTerm) {
  auto c = gt_config(2, 400);
  c.revealed_size = 1;
  const auto row = run_trials(c).rows[0];
  EXPECT_NEAR(row.fano_bound, fano_error_lower_bound(2, row.mi_used.value, 8, 2, 1), 1e-15);
  EXPECT_GE(row.empirical_pe, row.fano_bound - 3 * row.pe_interval.half_width);
}

TEST(RunTrials, OneBitGaussianUsesMonteCarloInformation) {
  ExperimentConfig c;
  c.n = 8;
  c.k = 2;
  c.model = {"one_bit_cs", 0.0, 10.0};
  c.strategy.type = "gaussian";
  c.t_values = {5};
  c.trials = 100;
  c.mi.samples = 5000;
  const auto row = run_trials(c).rows[0];
  EXPECT_EQ(row.mi_used.method, MiMethod::kMonteCarlo);
  ASSERT_TRUE(row.mi_used.std_error);
  EXPECT_LE(row.mi_used.value, std::numbers::ln2 + 3 * *row.mi_used.std_error);
}

TEST(RunTrials, AdaptiveSplittingWithPlugIn) {
  ExperimentConfig c;
  c.n = 16;
  c.k = 2;
  c.model = {"group_testing", 0.0, 1.0};
  c.strategy.type = "binary_splitting";
  c.decoder = DecoderKind::kStrategy;
  c.t_values = {12};
  c.trials = 200;
  c.mi = {MiMode::kPlugIn, 2000};
  const auto row = run_trials(c).rows[0];
  EXPECT_EQ(row.error_count, 0U);
  EXPECT_EQ(row.mi_used.method, MiMethod::kPlugIn);
  EXPECT_LE(row.mi_used.value, std::numbers::ln2 + 3 * row.mi_used.std_error.value_or(0.0));
  EXPECT_GT(row.mi_used.value, 0.0);
}

TEST(RunTrials, CompAmbiguityCountsAsError) {
  auto c = gt_config(1, 200);
  c.decoder = DecoderKind::kComp;
  const auto row = run_trials(c).rows[0];
  EXPECT_GT(row.ambiguous_count, 0U);
  EXPECT_GE(row.error_count, row.ambiguous_count);
}

TEST(Gap, IdenticalConfigsGiveZero) {
  const auto c = gt_config(4, 300);
  const auto g = compare_adaptive_gap(c, c);
  EXPECT_EQ(g.gap, 0.0);
  EXPECT_LE(g.gap_lo, 0.0);
  EXPECT_GE(g.gap_hi, 0.0);
}

TEST(Gap, MismatchedDimsAreRejected) {
  auto a = gt_config(4, 100);
  auto b = gt_config(4, 100);
  b.n = 9;
  EXPECT_THROW(compare_adaptive_gap(a, b), DomainError);
}

TEST(Serialization, UnboundedIsAString) {
  TBound b{0.0, true};
  EXPECT_EQ(to_json(b), "unbounded");
  EXPECT_EQ(to_json(TBound{2.5, false}), 2.5);
}
