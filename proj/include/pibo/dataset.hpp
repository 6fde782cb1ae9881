#pragma once

#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "pibo/errors.hpp"
#include "pibo/search_space.hpp"

namespace pibo {

/// Observations in insertion order. No grid point appears twice.
class Dataset {
 public:
  Dataset() = default;

  void add(DesignPoint point, double value) {
    if (!seen_.insert(point.indices).second)
      throw PreconditionError("duplicate point in dataset");
    points_.push_back(std::move(point));
    values_.push_back(value);
  }

  bool contains(const IndexTuple& indices) const { return seen_.contains(indices); }

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const std::vector<DesignPoint>& points() const noexcept { return points_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const DesignPoint& point(std::size_t i) const { return points_.at(i); }
  double value(std::size_t i) const { return values_.at(i); }

  /// Position of the lowest value; ties go to the earliest observation.
  std::size_t argmin() const {
    if (empty()) throw PreconditionError("argmin of an empty dataset");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values_.size(); ++i)
      if (values_[i] < values_[best]) best = i;
    return best;
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.points_ == b.points_ && a.values_ == b.values_;
  }

 private:
  std::vector<DesignPoint> points_;
  std::vector<double> values_;
  std::unordered_set<IndexTuple, IndexTupleHash> seen_;
};

}  // namespace pibo
