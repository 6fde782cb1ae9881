#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pibo/pibo.hpp"

namespace pibo::testing {

/// `n` uniform points in [0,1]^d, one per column.
inline Eigen::MatrixXd random_unit_points(std::size_t d, std::size_t n, Rng& rng) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = uniform_unit(rng);
  return x;
}

inline std::vector<double> random_values(std::size_t n, Rng& rng, double scale = 10.0, double offset = 0.0) {
  std::vector<double> y(n);
  for (auto& v : y) v = offset + scale * (uniform_unit(rng) - 0.5);
  return y;
}

inline SearchSpace line_space(std::uint32_t points) {
  return SearchSpace({{"x", 0.0, static_cast<double>(points - 1), 1.0}});
}

/// Independent nested-loop search over a six-axis grid; no use of enumerate_all.
template <class F>
std::pair<IndexTuple, double> nested_loop_argmin(const SearchSpace& space, const F& f) {
  IndexTuple best;
  double best_value = std::numeric_limits<double>::infinity();
  IndexTuple idx(6);
  for (idx[0] = 0; idx[0] < space.cardinality(0); ++idx[0])
    for (idx[1] = 0; idx[1] < space.cardinality(1); ++idx[1])
      for (idx[2] = 0; idx[2] < space.cardinality(2); ++idx[2])
        for (idx[3] = 0; idx[3] < space.cardinality(3); ++idx[3])
          for (idx[4] = 0; idx[4] < space.cardinality(4); ++idx[4])
            for (idx[5] = 0; idx[5] < space.cardinality(5); ++idx[5]) {
              const double v = f(space.point_from_indices(idx));
              if (v < best_value) {
                best_value = v;
                best = idx;
              }
            }
  return {best, best_value};
}

}  // namespace pibo::testing
