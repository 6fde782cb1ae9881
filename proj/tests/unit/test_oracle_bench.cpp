#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "pibo/pibo.hpp"

using namespace pibo;

namespace {

SearchSpace reduced_grid() {
  // Six axes, 3*3*2*2*2*2 = 144 points, all with valid geometry.
  return SearchSpace({{"W", 4.0, 5.0, 0.5},
                      {"S", 5.0, 6.0, 0.5},
                      {"T", 1.1, 1.2, 0.1},
                      {"H1", 3.0, 3.5, 0.5},
                      {"H2", 9.0, 9.5, 0.5},
                      {"er", 3.6, 3.7, 0.1}});
}

}  // namespace

TEST(BruteForce, HandSetTwoByTwo) {
  const SearchSpace space({{"a", 0, 1, 1}, {"b", 0, 1, 1}});
  // Values 4, 2, 3, 1 in row-major order.
  auto f = [](const DesignPoint& p) { return 4.0 - 2.0 * p.values[0] - 2.0 * p.values[1] + p.values[0]; };
  const auto r = brute_force(space, f);
  EXPECT_EQ(r.best_value, 1.0);
  EXPECT_EQ(r.best_point.indices, (IndexTuple{1, 1}));
  EXPECT_EQ(r.evaluated, 4u);
}

TEST(BruteForce, ConstantObjectiveReturnsFirstPoint) {
  const auto space = reduced_grid();
  const auto r = brute_force(space, [](const DesignPoint&) { return 3.0; });
  EXPECT_EQ(space.flat_index(r.best_point), 0u);
}

TEST(BruteForce, MatchesNestedLoops) {
  const auto space = reduced_grid();
  const stripline::StriplineObjective obj;
  const auto r = brute_force(space, obj, {.cap = kDefaultEnumerationCap, .keep_table = true, .on_point = {}});
  const auto [idx, value] = pibo::testing::nested_loop_argmin(space, obj);
  EXPECT_EQ(r.best_point.indices, idx);
  EXPECT_EQ(r.best_value, value);
  ASSERT_EQ(r.table.size(), 144u);
  EXPECT_EQ(*std::min_element(r.table.begin(), r.table.end()), value);
}

TEST(BruteForce, CorrectedGridOptimum) {
  // Frozen from the independent Python evaluation of the full grid.
  const auto space = SearchSpace::stripline_grid();
  const auto r = brute_force(space, stripline::StriplineObjective{});
  EXPECT_NEAR(r.best_value, 71.24200767485056, 1e-9 * 71.24);
  EXPECT_EQ(space.flat_index(r.best_point), 32682u);
  const std::vector<double> expected = {4.5, 7.75, 1.1, 4.5, 10.0, 3.6};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(r.best_point.values[i], expected[i], 1e-12);
  EXPECT_EQ(r.invalid, 0u);
}

TEST(BruteForce, CapAndInvalidGrid) {
  const auto space = reduced_grid();
  EXPECT_THROW(brute_force(space, [](const DesignPoint&) { return 0.0; }, {.cap = 100, .keep_table = false, .on_point = {}}),
               CapacityError);
  EXPECT_THROW(brute_force(SearchSpace::stripline_grid_swapped_heights(), stripline::StriplineObjective{}),
               InvalidGeometryError);
}

TEST(Quantile, Interpolates) {
  EXPECT_EQ(quantile({3, 1, 2}, 0.5), 2.0);
  EXPECT_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_EQ(quantile({5}, 0.9), 5.0);
  EXPECT_TRUE(std::isnan(quantile({}, 0.5)));
  EXPECT_EQ(sample_variance({1, 2, 3, 4}), 5.0 / 3.0);
}

TEST(Benchmark, ZeroSeedsLeavesAggregatesUndefined) {
  const auto space = reduced_grid();
  const auto report = benchmark(space, stripline::StriplineObjective{}, PiboConfig{}, {}, 1.0);
  const auto a = report.aggregates();
  EXPECT_EQ(a.runs, 0u);
  EXPECT_FALSE(a.success_rate);
  EXPECT_FALSE(a.best_value_median);
}

TEST(Benchmark, ExhaustiveBudgetAlwaysHits) {
  // Budget equals the grid size, so every run must find the optimum.
  const auto space = reduced_grid();
  const stripline::StriplineObjective obj;
  const auto oracle = brute_force(space, obj);
  PiboConfig cfg;
  cfg.workers = 1;
  cfg.per_worker.init_samples = 4;
  cfg.per_worker.iterations = 100;
  cfg.final_iterations = 40;
  const std::vector<std::uint64_t> seeds = {3, 1, 2};
  const auto report = benchmark(space, obj, cfg, seeds, oracle.best_value);
  ASSERT_EQ(report.records.size(), 3u);
  EXPECT_EQ(report.records[0].seed, 1u);
  const auto a = report.aggregates();
  EXPECT_EQ(a.runs, 3u);
  EXPECT_EQ(*a.success_rate, 1.0);
  EXPECT_EQ(*a.within_tol_rate, 1.0);
  for (const auto& r : report.records) {
    EXPECT_TRUE(r.hit_global);
    EXPECT_LE(*r.evals_to_within_tol, *r.evals_to_global);
    EXPECT_LE(*r.evals_to_global, r.total_evaluations);
    EXPECT_EQ(r.best_value, oracle.best_value);
  }
}

TEST(Benchmark, AggregatesAreConsistent) {
  BenchReport report;
  report.oracle_value = 10.0;
  for (int i = 0; i < 10; ++i) {
    BenchRecord r;
    r.seed = static_cast<std::uint64_t>(i);
    r.best_value = 10.0 + 0.02 * i;
    r.hit_global = i == 0;
    if (i == 0) r.evals_to_global = 100;
    if (r.best_value <= 10.1) r.evals_to_within_tol = 50 + static_cast<std::size_t>(i);
    report.records.push_back(r);
  }
  BenchRecord failed;
  failed.failed = true;
  report.records.push_back(failed);
  const auto a = report.aggregates();
  EXPECT_EQ(a.runs, 10u);
  EXPECT_EQ(a.failures, 1u);
  EXPECT_DOUBLE_EQ(*a.success_rate, 0.1);
  EXPECT_DOUBLE_EQ(*a.within_tol_rate, 0.6);
  EXPECT_EQ(*a.median_evals_to_global, 100.0);
  EXPECT_LE(*a.best_value_q10, *a.best_value_median);
  EXPECT_LE(*a.best_value_median, *a.best_value_q90);
}

TEST(ScoreTrace, CountsEvaluationsUpToThreshold) {
  const auto space = pibo::testing::line_space(10);
  RunTrace trace;
  const double values[] = {20.0, 15.0, 10.05, 12.0, 10.0};
  for (std::uint32_t i = 0; i < 5; ++i) trace.append(0, Phase::Init, space.point_from_indices({i}), values[i], 0.0);
  BenchRecord rec;
  rec.best_value = 10.0;
  score_trace(rec, trace, 10.0, 0.01);
  EXPECT_EQ(*rec.evals_to_within_tol, 3u);
  EXPECT_EQ(*rec.evals_to_global, 5u);
  EXPECT_TRUE(rec.hit_global);
  EXPECT_EQ(rec.total_evaluations, 5u);
}

TEST(Compare, EqualBudgets) {
  const auto space = reduced_grid();
  PiboConfig cfg;
  cfg.workers = 2;
  cfg.per_worker.init_samples = 4;
  cfg.per_worker.iterations = 6;
  cfg.final_iterations = 5;
  const auto solo = solo_config_for(cfg, 7);
  EXPECT_EQ(solo.init_samples + solo.iterations, cfg.evaluation_budget());
  const std::vector<std::uint64_t> seeds = {1, 2};
  const auto cmp = compare_solo_vs_pibo(space, stripline::StriplineObjective{}, cfg, seeds);
  EXPECT_EQ(cmp.total_budget, 25u);
  ASSERT_EQ(cmp.rows.size(), 2u);
  const auto s = cmp.summary();
  EXPECT_EQ(s.runs, 2u);
  EXPECT_EQ(s.pibo_wins + s.solo_wins + s.ties, 2u);
}
