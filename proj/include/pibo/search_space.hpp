#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pibo/errors.hpp"
#include "pibo/rng.hpp"

namespace pibo {

using IndexTuple = std::vector<std::uint32_t>;

struct IndexTupleHash {
  std::size_t operator()(const IndexTuple& t) const noexcept {
    std::uint64_t h = 0x84222325CBF29CE4ULL;
    for (auto i : t) h = splitmix64(h ^ i);
    return static_cast<std::size_t>(h);
  }
};

/// One discrete axis: min, min + step, ..., max.
struct AxisSpec {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  std::size_t cardinality() const {
    return static_cast<std::size_t>(std::llround((max - min) / step)) + 1;
  }

  double value_at(std::uint32_t index) const { return min + static_cast<double>(index) * step; }

  /// Throws PreconditionError unless step > 0, max >= min and max lies on the lattice.
  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step))
      throw PreconditionError("axis '" + name + "': step must be positive");
    if (!std::isfinite(min) || !std::isfinite(max) || max < min)
      throw PreconditionError("axis '" + name + "': max must be >= min");
    const double last = min + static_cast<double>(cardinality() - 1) * step;
    if (std::abs(last - max) > 1e-9 * std::max(1.0, std::abs(max)))
      throw PreconditionError("axis '" + name + "': (max - min) is not a multiple of step");
  }
};

/// A grid point. `indices` is the identity; `values` is its decoding and is only
/// ever produced by SearchSpace::point_from_indices.
struct DesignPoint {
  IndexTuple indices;
  std::vector<double> values;

  friend bool operator==(const DesignPoint& a, const DesignPoint& b) { return a.indices == b.indices; }
  friend bool operator<(const DesignPoint& a, const DesignPoint& b) { return a.indices < b.indices; }
};

class SearchSpace;

/// Row-major odometer over every grid point; the first axis varies slowest.
class GridIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = DesignPoint;
  using difference_type = std::ptrdiff_t;
  using pointer = const DesignPoint*;
  using reference = const DesignPoint&;

  GridIterator() = default;
  GridIterator(const SearchSpace* space, bool at_end);

  reference operator*() const { return current_; }
  pointer operator->() const { return &current_; }
  GridIterator& operator++();
  GridIterator operator++(int) {
    auto copy = *this;
    ++*this;
    return copy;
  }
  friend bool operator==(const GridIterator& a, const GridIterator& b) {
    return a.done_ == b.done_ && (a.done_ || a.current_.indices == b.current_.indices);
  }

 private:
  const SearchSpace* space_ = nullptr;
  DesignPoint current_;
  bool done_ = true;
};

struct GridRange {
  const SearchSpace* space;
  GridIterator begin() const { return GridIterator(space, false); }
  GridIterator end() const { return GridIterator(space, true); }
};

/// Discrete multi-axis design grid. Immutable after construction.
class SearchSpace {
 public:
  explicit SearchSpace(std::vector<AxisSpec> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw PreconditionError("search space needs at least one axis");
    cardinalities_.reserve(axes_.size());
    total_ = 1;
    for (const auto& axis : axes_) {
      axis.validate();
      const auto c = axis.cardinality();
      if (c > std::numeric_limits<std::uint32_t>::max())
        throw PreconditionError("axis '" + axis.name + "' has too many values");
      cardinalities_.push_back(c);
      if (total_ > std::numeric_limits<std::uint64_t>::max() / c)
        throw PreconditionError("search space too large");
      total_ *= c;
    }
    strides_.assign(axes_.size(), 1);
    for (std::size_t i = axes_.size() - 1; i > 0; --i) strides_[i - 1] = strides_[i] * cardinalities_[i];
  }

  /// The six-axis stripline grid (W, S, T, H1, H2, er) with T/H1/H2 ranges chosen so
  /// the trace sits inside the dielectric: 21*21*3*5*5*3 = 99225 points.
  static SearchSpace stripline_grid() {
    return SearchSpace({{"W", 3.0, 8.0, 0.25},
                        {"S", 3.0, 8.0, 0.25},
                        {"T", 1.1, 1.3, 0.1},
                        {"H1", 3.0, 5.0, 0.5},
                        {"H2", 8.0, 10.0, 0.5},
                        {"er", 3.6, 3.8, 0.1}});
  }

  /// Same cardinality, but the T/H1/H2 ranges swapped so that H1 + T always exceeds H2.
  /// Every point is geometrically invalid for the stripline model.
  static SearchSpace stripline_grid_swapped_heights() {
    return SearchSpace({{"W", 3.0, 8.0, 0.25},
                        {"S", 3.0, 8.0, 0.25},
                        {"T", 3.0, 5.0, 0.5},
                        {"H1", 8.0, 10.0, 0.5},
                        {"H2", 1.1, 1.3, 0.1},
                        {"er", 3.6, 3.8, 0.1}});
  }

  std::size_t dimension() const noexcept { return axes_.size(); }
  const std::vector<AxisSpec>& axes() const noexcept { return axes_; }
  const AxisSpec& axis(std::size_t i) const { return axes_.at(i); }
  std::size_t cardinality(std::size_t i) const { return cardinalities_.at(i); }
  std::uint64_t total_count() const noexcept { return total_; }

  DesignPoint point_from_indices(std::span<const std::uint32_t> indices) const {
    if (indices.size() != axes_.size())
      throw BoundsError("expected " + std::to_string(axes_.size()) + " indices, got " +
                        std::to_string(indices.size()));
    DesignPoint p;
    p.indices.assign(indices.begin(), indices.end());
    p.values.resize(axes_.size());
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      if (indices[i] >= cardinalities_[i])
        throw BoundsError("index " + std::to_string(indices[i]) + " out of range for axis '" +
                          axes_[i].name + "' (cardinality " + std::to_string(cardinalities_[i]) + ")");
      p.values[i] = axes_[i].value_at(indices[i]);
    }
    return p;
  }

  DesignPoint point_from_indices(std::initializer_list<std::uint32_t> indices) const {
    return point_from_indices(std::span<const std::uint32_t>(indices.begin(), indices.size()));
  }

  std::uint64_t flat_index(std::span<const std::uint32_t> indices) const {
    std::uint64_t flat = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i) flat += strides_[i] * indices[i];
    return flat;
  }
  std::uint64_t flat_index(const DesignPoint& p) const { return flat_index(p.indices); }

  IndexTuple indices_from_flat(std::uint64_t flat) const {
    if (flat >= total_) throw BoundsError("flat index " + std::to_string(flat) + " out of range");
    IndexTuple t(axes_.size());
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      t[i] = static_cast<std::uint32_t>(flat / strides_[i]);
      flat %= strides_[i];
    }
    return t;
  }

  DesignPoint point_from_flat(std::uint64_t flat) const { return point_from_indices(indices_from_flat(flat)); }

  /// Unit-hypercube coordinates: index / (cardinality - 1), or 0 on a single-valued axis.
  void normalize_into(std::span<const std::uint32_t> indices, std::span<double> out) const {
    for (std::size_t i = 0; i < axes_.size(); ++i)
      out[i] = cardinalities_[i] > 1
                   ? static_cast<double>(indices[i]) / static_cast<double>(cardinalities_[i] - 1)
                   : 0.0;
  }

  std::vector<double> normalize(const DesignPoint& p) const {
    std::vector<double> out(axes_.size());
    normalize_into(p.indices, out);
    return out;
  }

  /// `n` distinct points drawn uniformly without replacement; the sequence is a pure
  /// function of (space, n, seed).
  std::vector<DesignPoint> sample_uniform(std::size_t n, std::uint64_t seed) const {
    std::vector<DesignPoint> out;
    for (auto flat : sample_flat(n, seed)) out.push_back(point_from_flat(flat));
    return out;
  }

  std::vector<std::uint64_t> sample_flat(std::size_t n, std::uint64_t seed) const {
    if (n > total_)
      throw CapacityError("cannot draw " + std::to_string(n) + " distinct points from a grid of " +
                          std::to_string(total_));
    Rng rng(seed);
    std::vector<std::uint64_t> out;
    out.reserve(n);
    if (n == 0) return out;
    if (total_ <= 4 * static_cast<std::uint64_t>(n) && total_ <= (1ULL << 26)) {
      // Dense draw: partial Fisher-Yates.
      std::vector<std::uint64_t> pool(total_);
      std::iota(pool.begin(), pool.end(), std::uint64_t{0});
      for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + uniform_below(rng, total_ - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
      }
      return out;
    }
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(2 * n);
    while (out.size() < n) {
      const auto flat = uniform_below(rng, total_);
      if (seen.insert(flat).second) out.push_back(flat);
    }
    return out;
  }

  /// Every point exactly once, row-major (first axis slowest, last fastest).
  GridRange enumerate_all() const { return GridRange{this}; }

 private:
  std::vector<AxisSpec> axes_;
  std::vector<std::size_t> cardinalities_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t total_ = 0;
};

inline GridIterator::GridIterator(const SearchSpace* space, bool at_end) : space_(space), done_(at_end) {
  if (!at_end) current_ = space_->point_from_flat(0);
}

inline GridIterator& GridIterator::operator++() {
  for (std::size_t i = space_->dimension(); i-- > 0;) {
    if (current_.indices[i] + 1 < space_->cardinality(i)) {
      ++current_.indices[i];
      current_.values[i] = space_->axis(i).value_at(current_.indices[i]);
      return *this;
    }
    current_.indices[i] = 0;
    current_.values[i] = space_->axis(i).value_at(0);
  }
  done_ = true;
  return *this;
}

}  // namespace pibo
