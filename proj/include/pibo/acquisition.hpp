#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "pibo/errors.hpp"
#include "pibo/gp.hpp"
#include "pibo/search_space.hpp"

namespace pibo {

enum class AcquisitionKind { LCB, PI, EI };

inline std::string to_string(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::LCB: return "LCB";
    case AcquisitionKind::PI: return "PI";
    case AcquisitionKind::EI: return "EI";
  }
  return "?";
}

struct AcquisitionConfig {
  AcquisitionKind kind = AcquisitionKind::LCB;
  double tau = 1.0;  ///< LCB exploration weight
  double xi = 0.0;   ///< PI/EI improvement margin
  /// Grids up to this size are scored exhaustively.
  std::uint64_t candidate_cap = 200'000;
  /// Random candidates per step on larger grids (plus the incumbent's neighbours).
  std::size_t subset_size = 10'000;

  void validate() const {
    if (!(tau >= 0.0)) throw PreconditionError("acquisition tau must be >= 0");
    if (!(xi >= 0.0)) throw PreconditionError("acquisition xi must be >= 0");
    if (subset_size == 0) throw PreconditionError("acquisition subset_size must be positive");
  }
};

/// Flat grid indices already evaluated.
using VisitedSet = std::unordered_set<std::uint64_t>;

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

/// mean - tau * stddev; minimized.
inline double lcb_score(double mean, double stddev, double tau) { return mean - tau * stddev; }

/// Probability of beating `best - xi` (minimization); maximized.
inline double pi_score(double mean, double stddev, double best, double xi) {
  const double gain = best - mean - xi;
  if (stddev <= 0.0) return gain > 0.0 ? 1.0 : 0.0;
  return normal_cdf(gain / stddev);
}

/// Expected improvement below `best - xi` (minimization); maximized.
inline double ei_score(double mean, double stddev, double best, double xi) {
  const double gain = best - mean - xi;
  if (stddev <= 0.0) return std::max(gain, 0.0);
  const double z = gain / stddev;
  return std::max(0.0, gain * normal_cdf(z) + stddev * normal_pdf(z));
}

/// The criterion's own value (LCB lower is better, PI/EI higher is better).
inline double acquisition_score(const AcquisitionConfig& cfg, const Posterior& p, double best) {
  switch (cfg.kind) {
    case AcquisitionKind::LCB: return lcb_score(p.mean, p.stddev(), cfg.tau);
    case AcquisitionKind::PI: return pi_score(p.mean, p.stddev(), best, cfg.xi);
    case AcquisitionKind::EI: return ei_score(p.mean, p.stddev(), best, cfg.xi);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Orientation-free cost: lower is always better.
inline double acquisition_cost(const AcquisitionConfig& cfg, double score) {
  return cfg.kind == AcquisitionKind::LCB ? score : -score;
}

struct Selection {
  DesignPoint point;
  std::uint64_t flat_index = 0;
  Posterior posterior;
  double score = 0.0;
};

/// Scores a fixed candidate list against successive fits of a growing dataset.
///
/// For every candidate it keeps v = chol^{-1} k(x) and |v|^2. When the next model
/// has the same theta and jitter and its factor starts with the rows already
/// absorbed, only the new rows are solved; otherwise the cache is rebuilt. Either
/// way each candidate's posterior is bit-identical to GpModel::predict.
class CandidateScorer {
 public:
  CandidateScorer(const SearchSpace& space, std::vector<std::uint64_t> flat_candidates)
      : space_(&space), flats_(std::move(flat_candidates)) {
    std::sort(flats_.begin(), flats_.end());
    flats_.erase(std::unique(flats_.begin(), flats_.end()), flats_.end());
    const auto d = space.dimension();
    coords_.resize(flats_.size() * d);
    for (std::size_t m = 0; m < flats_.size(); ++m) {
      const auto idx = space.indices_from_flat(flats_[m]);
      space.normalize_into(idx, std::span<double>(coords_.data() + m * d, d));
    }
    sqnorm_.assign(flats_.size(), 0.0);
  }

  /// Every grid point, in row-major order.
  static CandidateScorer exhaustive(const SearchSpace& space) {
    std::vector<std::uint64_t> all(space.total_count());
    for (std::uint64_t i = 0; i < all.size(); ++i) all[i] = i;
    return CandidateScorer(space, std::move(all));
  }

  std::size_t size() const noexcept { return flats_.size(); }
  const std::vector<std::uint64_t>& candidates() const noexcept { return flats_; }
  /// Training rows currently absorbed into the cache.
  std::size_t absorbed() const noexcept { return columns_.size(); }
  /// Number of full rebuilds performed so far.
  std::size_t rebuilds() const noexcept { return rebuilds_; }

  void sync(const GpModel& model) {
    if (!cache_matches(model)) {
      columns_.clear();
      std::fill(sqnorm_.begin(), sqnorm_.end(), 0.0);
      chol_snapshot_.resize(0, 0);
      inputs_snapshot_.resize(0, 0);
      theta_ = model.theta();
      jitter_ = model.jitter();
      ++rebuilds_;
    }
    extend(model);
  }

  /// Posterior of candidate `m` under `model` (syncs first).
  Posterior posterior_at(const GpModel& model, std::size_t m) {
    sync(model);
    double mean_s = 0.0;
    const auto& w = model.whitened_values();
    for (std::size_t j = 0; j < columns_.size(); ++j) mean_s += columns_[j][m] * w(static_cast<Eigen::Index>(j));
    return model.destandardize(mean_s, sqnorm_[m]);
  }

  /// Best unvisited candidate; ties go to the lowest flat index. nullopt when every
  /// candidate has been visited.
  std::optional<Selection> select(const GpModel& model, const VisitedSet& visited, const AcquisitionConfig& cfg) {
    sync(model);
    const auto& w = model.whitened_values();
    const double best = *std::min_element(model.values().begin(), model.values().end());
    const std::size_t n = columns_.size();

    std::optional<std::size_t> winner;
    double winner_cost = std::numeric_limits<double>::infinity();
    double winner_score = 0.0;
    Posterior winner_post;
    std::vector<double> acc(kBlock);
    for (std::size_t lo = 0; lo < flats_.size(); lo += kBlock) {
      const std::size_t hi = std::min(flats_.size(), lo + kBlock);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double wj = w(static_cast<Eigen::Index>(j));
        const double* col = columns_[j].data();
        for (std::size_t m = lo; m < hi; ++m) acc[m - lo] += col[m] * wj;
      }
      for (std::size_t m = lo; m < hi; ++m) {
        if (visited.contains(flats_[m])) continue;
        const Posterior post = model.destandardize(acc[m - lo], sqnorm_[m]);
        const double score = acquisition_score(cfg, post, best);
        const double cost = acquisition_cost(cfg, score);
        if (!winner || cost < winner_cost) {
          if (std::isnan(cost)) continue;
          winner = m;
          winner_cost = cost;
          winner_score = score;
          winner_post = post;
        }
      }
    }
    if (!winner) return std::nullopt;
    return Selection{space_->point_from_flat(flats_[*winner]), flats_[*winner], winner_post, winner_score};
  }

 private:
  static constexpr std::size_t kBlock = 256;

  bool cache_matches(const GpModel& model) const {
    const auto a = static_cast<Eigen::Index>(columns_.size());
    if (model.theta() != theta_ || model.jitter() != jitter_) return false;
    if (static_cast<Eigen::Index>(model.size()) < a) return false;
    if (a == 0) return true;
    if (model.inputs().leftCols(a) != inputs_snapshot_) return false;
    return model.chol().topLeftCorner(a, a) == chol_snapshot_;
  }

  void extend(const GpModel& model) {
    const std::size_t start = columns_.size();
    const std::size_t n = model.size();
    if (start == n) return;
    const auto d = space_->dimension();
    const auto& chol = model.chol();
    for (std::size_t j = start; j < n; ++j) columns_.emplace_back(flats_.size());
    // Blocked over candidates so the columns of one block stay in cache.
    for (std::size_t lo = 0; lo < flats_.size(); lo += kBlock) {
      const std::size_t hi = std::min(flats_.size(), lo + kBlock);
      for (std::size_t j = start; j < n; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const auto xj = model.column(j);
        double* out = columns_[j].data();
        for (std::size_t m = lo; m < hi; ++m)
          out[m] = matern52(std::span<const double>(coords_.data() + m * d, d), xj, theta_);
        // Four rows per pass; each element still subtracts in ascending i.
        std::size_t i = 0;
        for (; i + 4 <= j; i += 4) {
          const auto ii = static_cast<Eigen::Index>(i);
          const double l0 = chol(jj, ii), l1 = chol(jj, ii + 1), l2 = chol(jj, ii + 2), l3 = chol(jj, ii + 3);
          const double* v0 = columns_[i].data();
          const double* v1 = columns_[i + 1].data();
          const double* v2 = columns_[i + 2].data();
          const double* v3 = columns_[i + 3].data();
          for (std::size_t m = lo; m < hi; ++m) out[m] = out[m] - l0 * v0[m] - l1 * v1[m] - l2 * v2[m] - l3 * v3[m];
        }
        for (; i < j; ++i) {
          const double lji = chol(jj, static_cast<Eigen::Index>(i));
          const double* vi = columns_[i].data();
          for (std::size_t m = lo; m < hi; ++m) out[m] -= lji * vi[m];
        }
        const double diag = chol(jj, jj);
        for (std::size_t m = lo; m < hi; ++m) {
          out[m] /= diag;
          sqnorm_[m] += out[m] * out[m];
        }
      }
    }
    const auto a = static_cast<Eigen::Index>(n);
    chol_snapshot_ = chol.topLeftCorner(a, a);
    inputs_snapshot_ = model.inputs().leftCols(a);
  }

  const SearchSpace* space_;
  std::vector<std::uint64_t> flats_;
  std::vector<double> coords_;
  std::vector<std::vector<double>> columns_;
  std::vector<double> sqnorm_;
  GpModel::RowMatrix chol_snapshot_;
  Eigen::MatrixXd inputs_snapshot_;
  double theta_ = 0.0;
  double jitter_ = -1.0;
  std::size_t rebuilds_ = 0;
};

namespace detail {

/// Training point of `model` with the lowest observed value, as grid indices.
inline IndexTuple incumbent_indices(const GpModel& model, const SearchSpace& space) {
  const auto& y = model.values();
  const auto best = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
  const auto x = model.column(best);
  IndexTuple idx(space.dimension());
  for (std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = static_cast<std::uint32_t>(std::llround(x[i] * static_cast<double>(space.cardinality(i) - 1)));
  return idx;
}

/// Seeded uniform subset plus the one-step neighbours of the incumbent.
inline std::vector<std::uint64_t> subset_candidates(const GpModel& model, const SearchSpace& space,
                                                    const VisitedSet& visited, const AcquisitionConfig& cfg,
                                                    std::uint64_t seed) {
  const auto draw = static_cast<std::size_t>(std::min<std::uint64_t>(cfg.subset_size, space.total_count()));
  std::vector<std::uint64_t> out;
  for (auto flat : space.sample_flat(draw, seed))
    if (!visited.contains(flat)) out.push_back(flat);
  auto center = incumbent_indices(model, space);
  for (std::size_t i = 0; i < center.size(); ++i) {
    for (int delta : {-1, 1}) {
      auto idx = center;
      const auto moved = static_cast<std::int64_t>(idx[i]) + delta;
      if (moved < 0 || moved >= static_cast<std::int64_t>(space.cardinality(i))) continue;
      idx[i] = static_cast<std::uint32_t>(moved);
      const auto flat = space.flat_index(idx);
      if (!visited.contains(flat)) out.push_back(flat);
    }
  }
  if (out.empty()) {
    // Every sampled point was visited: fall back to the first unvisited points.
    for (std::uint64_t flat = 0; flat < space.total_count() && out.size() < cfg.subset_size; ++flat)
      if (!visited.contains(flat)) out.push_back(flat);
  }
  return out;
}

}  // namespace detail

/// Next point to evaluate: argmin of LCB (argmax of PI/EI) over unvisited candidates.
/// Candidates are the whole grid when it has at most `candidate_cap` points,
/// otherwise a subset drawn from `seed`. Returns nullopt once the grid is exhausted.
inline std::optional<Selection> select_next(const GpModel& model, const SearchSpace& space,
                                            const VisitedSet& visited, const AcquisitionConfig& cfg,
                                            std::uint64_t seed = 0) {
  cfg.validate();
  if (visited.size() >= space.total_count()) return std::nullopt;
  if (space.total_count() <= cfg.candidate_cap) {
    auto scorer = CandidateScorer::exhaustive(space);
    return scorer.select(model, visited, cfg);
  }
  CandidateScorer scorer(space, detail::subset_candidates(model, space, visited, cfg, seed));
  return scorer.select(model, visited, cfg);
}

}  // namespace pibo
