#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "pibo/search_space.hpp"

using namespace pibo;

TEST(SearchSpace, StriplineGridCardinality) {
  const auto space = SearchSpace::stripline_grid();
  EXPECT_EQ(space.total_count(), 99225u);
  EXPECT_EQ(space.cardinality(0), 21u);
  EXPECT_EQ(space.cardinality(1), 21u);
  EXPECT_EQ(space.cardinality(2), 3u);
  EXPECT_EQ(space.cardinality(3), 5u);
  EXPECT_EQ(space.cardinality(4), 5u);
  EXPECT_EQ(space.cardinality(5), 3u);
  EXPECT_EQ(SearchSpace::stripline_grid_swapped_heights().total_count(), 99225u);
}

TEST(SearchSpace, DegenerateAxes) {
  std::vector<AxisSpec> axes;
  for (int i = 0; i < 6; ++i) axes.push_back({"a" + std::to_string(i), 2.0, 2.0, 0.5});
  const SearchSpace space(axes);
  EXPECT_EQ(space.total_count(), 1u);
  const auto p = space.point_from_indices({0, 0, 0, 0, 0, 0});
  for (double x : space.normalize(p)) EXPECT_EQ(x, 0.0);
}

TEST(SearchSpace, WidthAxisAlone) {
  const SearchSpace space({{"W", 3.0, 8.0, 0.25}});
  EXPECT_EQ(space.total_count(), 21u);
}

TEST(SearchSpace, InvalidAxesRejected) {
  EXPECT_THROW(SearchSpace({{"x", 0.0, 1.0, 0.0}}), PreconditionError);
  EXPECT_THROW(SearchSpace({{"x", 1.0, 0.0, 0.1}}), PreconditionError);
  EXPECT_THROW(SearchSpace({{"x", 0.0, 1.0, 0.3}}), PreconditionError);
  EXPECT_THROW(SearchSpace(std::vector<AxisSpec>{}), PreconditionError);
}

TEST(SearchSpace, CornersDecode) {
  const auto space = SearchSpace::stripline_grid();
  const auto lo = space.point_from_indices({0, 0, 0, 0, 0, 0});
  const std::vector<double> lo_expected = {3, 3, 1.1, 3, 8, 3.6};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(lo.values[i], lo_expected[i], 1e-12);
  const auto hi = space.point_from_indices({20, 20, 2, 4, 4, 2});
  const std::vector<double> hi_expected = {8, 8, 1.3, 5, 10, 3.8};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(hi.values[i], hi_expected[i], 1e-12);
  EXPECT_EQ(space.point_from_indices({1, 0, 0, 0, 0, 0}).values[0], 3.25);
}

TEST(SearchSpace, OutOfRangeIndexNamesAxis) {
  const auto space = SearchSpace::stripline_grid();
  try {
    space.point_from_indices({0, 0, 3, 0, 0, 0});
    FAIL() << "expected BoundsError";
  } catch (const BoundsError& e) {
    EXPECT_NE(std::string(e.what()).find("'T'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(space.point_from_indices({0, 0, 0}), BoundsError);
}

TEST(SearchSpace, Normalize) {
  const auto space = SearchSpace::stripline_grid();
  for (double x : space.normalize(space.point_from_indices({0, 0, 0, 0, 0, 0}))) EXPECT_EQ(x, 0.0);
  for (double x : space.normalize(space.point_from_indices({20, 20, 2, 4, 4, 2}))) EXPECT_EQ(x, 1.0);
  EXPECT_EQ(space.normalize(space.point_from_indices({10, 0, 0, 0, 0, 0}))[0], 0.5);
}

TEST(SearchSpace, NormalizedNeighbourDistance) {
  const auto space = SearchSpace::stripline_grid();
  const auto base = space.point_from_indices({3, 4, 1, 2, 2, 1});
  const auto xb = space.normalize(base);
  for (std::size_t axis = 0; axis < 6; ++axis) {
    auto idx = base.indices;
    ++idx[axis];
    const auto xn = space.normalize(space.point_from_indices(idx));
    double r2 = 0;
    for (std::size_t i = 0; i < 6; ++i) r2 += (xn[i] - xb[i]) * (xn[i] - xb[i]);
    EXPECT_NEAR(std::sqrt(r2), 1.0 / static_cast<double>(space.cardinality(axis) - 1), 1e-15);
  }
}

TEST(SearchSpace, IndexRoundTripAndInjectiveNormalization) {
  const auto space = SearchSpace::stripline_grid();
  std::set<std::vector<double>> images;
  std::uint64_t flat = 0;
  for (const auto& p : space.enumerate_all()) {
    EXPECT_EQ(space.point_from_indices(p.indices).indices, p.indices);
    EXPECT_EQ(space.flat_index(p), flat);
    EXPECT_EQ(space.indices_from_flat(flat), p.indices);
    images.insert(space.normalize(p));
    ++flat;
  }
  EXPECT_EQ(images.size(), space.total_count());
}

TEST(SearchSpace, EnumerateSmallGrid) {
  const SearchSpace space({{"a", 0, 1, 1}, {"b", 10, 12, 1}});
  std::vector<IndexTuple> seen;
  for (const auto& p : space.enumerate_all()) seen.push_back(p.indices);
  ASSERT_EQ(seen.size(), 6u);
  EXPECT_EQ(seen.front(), (IndexTuple{0, 0}));
  EXPECT_EQ(seen[1], (IndexTuple{0, 1}));  // last axis fastest
  EXPECT_EQ(seen.back(), (IndexTuple{1, 2}));
}

TEST(SearchSpace, EnumerateStriplineGridHasNoDuplicates) {
  const auto space = SearchSpace::stripline_grid();
  std::unordered_set<IndexTuple, IndexTupleHash> seen;
  std::size_t count = 0;
  for (const auto& p : space.enumerate_all()) {
    seen.insert(p.indices);
    ++count;
  }
  EXPECT_EQ(count, 99225u);
  EXPECT_EQ(seen.size(), 99225u);
}

TEST(SearchSpace, SampleUniformBasics) {
  const SearchSpace tiny({{"a", 0, 1, 1}, {"b", 0, 1, 1}});
  const auto all = tiny.sample_uniform(4, 42);
  std::set<IndexTuple> distinct;
  for (const auto& p : all) distinct.insert(p.indices);
  EXPECT_EQ(distinct.size(), 4u);
  EXPECT_TRUE(tiny.sample_uniform(0, 1).empty());
  EXPECT_THROW(tiny.sample_uniform(5, 1), CapacityError);

  const auto space = SearchSpace::stripline_grid();
  const auto a = space.sample_uniform(40, 7);
  const auto b = space.sample_uniform(40, 7);
  EXPECT_EQ(a, b);
  std::set<IndexTuple> d2;
  for (const auto& p : a) d2.insert(p.indices);
  EXPECT_EQ(d2.size(), 40u);
  EXPECT_NE(a, space.sample_uniform(40, 8));
}

TEST(SearchSpace, SampleUniformFrequencies) {
  // 12-point grid, 2 draws per seed: each point's inclusion probability is 1/6.
  const SearchSpace space({{"a", 0, 2, 1}, {"b", 0, 3, 1}});
  const int trials = 6000;
  std::map<std::uint64_t, int> hits;
  for (int s = 0; s < trials; ++s)
    for (auto flat : space.sample_flat(2, static_cast<std::uint64_t>(s))) ++hits[flat];
  const double p = 2.0 / 12.0;
  const double expected = trials * p;
  const double sigma = std::sqrt(trials * p * (1 - p));
  ASSERT_EQ(hits.size(), 12u);
  for (const auto& [flat, n] : hits) EXPECT_LE(std::abs(n - expected), 5 * sigma) << "point " << flat;
}
