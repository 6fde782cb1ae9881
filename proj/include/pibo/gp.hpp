#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pibo/dataset.hpp"
#include "pibo/errors.hpp"
#include "pibo/search_space.hpp"

namespace pibo {

/// First jitter tried by a fit, and the largest it may escalate to (x10 per failure).
inline constexpr double kDefaultJitter = 1e-8;
inline constexpr double kMaxJitter = 1e-4;

/// Length-scale grid searched by maximum marginal likelihood.
inline const std::vector<double> kDefaultThetaGrid = {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0};

struct KernelParams {
  double theta = 0.5;  ///< length scale, in normalized coordinates
  double jitter = kDefaultJitter;

  void validate() const {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw PreconditionError("kernel theta must be positive");
    if (!(jitter >= 0.0) || jitter > 1e-3) throw PreconditionError("kernel jitter must lie in [0, 1e-3]");
  }
};

/// Matern-5/2 correlation at distance r; unit variance.
inline double matern52_at_distance(double r, double theta) {
  const double s = std::sqrt(5.0) * r / theta;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

inline double matern52(std::span<const double> a, std::span<const double> b, double theta) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    r2 += d * d;
  }
  return matern52_at_distance(std::sqrt(r2), theta);
}

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;

  double stddev() const { return std::sqrt(variance); }
};

/// Noise-free GP regressor on standardized observations with a Matern-5/2 kernel.
///
/// The Cholesky factor is built row by row, so row j depends only on points 0..j.
/// Forward-substituting a candidate's kernel vector repeats exactly the arithmetic
/// that would produce its factor row, which lets CandidateScorer extend cached
/// whitened vectors one training point at a time and still agree bit-for-bit
/// with predict().
class GpModel {
 public:
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  /// `inputs` holds one normalized point per column.
  static GpModel fit(Eigen::MatrixXd inputs, std::vector<double> values, KernelParams params) {
    params.validate();
    const auto n = static_cast<std::size_t>(inputs.cols());
    if (n == 0) throw PreconditionError("cannot fit a GP to zero observations");
    if (values.size() != n) throw PreconditionError("inputs and values differ in length");
    for (Eigen::Index j = 1; j < inputs.cols(); ++j)
      for (Eigen::Index i = 0; i < j; ++i)
        if (inputs.col(i) == inputs.col(j)) throw PreconditionError("duplicate training point");

    GpModel m;
    m.inputs_ = std::move(inputs);
    m.values_ = std::move(values);
    m.params_ = params;
    m.standardize();

    const auto nn = static_cast<Eigen::Index>(n);
    RowMatrix gram(nn, nn);
    for (Eigen::Index j = 0; j < nn; ++j) {
      for (Eigen::Index k = 0; k < j; ++k) {
        gram(j, k) = matern52(m.column(j), m.column(k), params.theta);
        gram(k, j) = gram(j, k);
      }
      gram(j, j) = 1.0;
    }

    double jitter = params.jitter;
    for (int attempt = 0;; ++attempt) {
      if (factorize(gram, jitter, m.chol_)) break;
      const double next = jitter == 0.0 ? kDefaultJitter : jitter * 10.0;
      if (next > kMaxJitter * (1.0 + 1e-9))
        throw IllConditionedError("Cholesky factorization failed", jitter);
      jitter = next;
    }
    m.jitter_ = jitter;

    m.white_.resize(nn);
    for (Eigen::Index j = 0; j < nn; ++j) {
      double s = m.standardized_[static_cast<std::size_t>(j)];
      for (Eigen::Index i = 0; i < j; ++i) s -= m.chol_(j, i) * m.white_(i);
      m.white_(j) = s / m.chol_(j, j);
    }
    m.alpha_.resize(nn);
    for (Eigen::Index j = nn; j-- > 0;) {
      double s = m.white_(j);
      for (Eigen::Index i = j + 1; i < nn; ++i) s -= m.chol_(i, j) * m.alpha_(i);
      m.alpha_(j) = s / m.chol_(j, j);
    }
    return m;
  }

  /// Kernel vector of normalized point `x` against every training point.
  void kernel_vector(std::span<const double> x, std::span<double> out) const {
    for (std::size_t j = 0; j < size(); ++j) out[j] = matern52(x, column(j), params_.theta);
  }

  /// Solves chol * out = k in place (out may alias k).
  void whiten(std::span<const double> k, std::span<double> out) const {
    for (std::size_t j = 0; j < size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      double s = k[j];
      for (Eigen::Index i = 0; i < jj; ++i) s -= chol_(jj, i) * out[static_cast<std::size_t>(i)];
      out[j] = s / chol_(jj, jj);
    }
  }

  /// Posterior from the standardized pieces v.w and v.v, v = chol^{-1} k.
  Posterior destandardize(double mean_standardized, double whitened_sqnorm) const {
    const double var = std::max(0.0, 1.0 - whitened_sqnorm);
    return {y_mean_ + y_std_ * mean_standardized, y_std_ * y_std_ * var};
  }

  Posterior predict(std::span<const double> x) const {
    std::vector<double> v(size());
    kernel_vector(x, v);
    whiten(v, v);
    double mean_s = 0.0;
    double sq = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      mean_s += v[j] * white_(static_cast<Eigen::Index>(j));
      sq += v[j] * v[j];
    }
    return destandardize(mean_s, sq);
  }

  /// log p(y | X, theta) of the standardized observations.
  double log_marginal_likelihood() const {
    double logdet_half = 0.0;
    for (Eigen::Index j = 0; j < chol_.rows(); ++j) logdet_half += std::log(chol_(j, j));
    const double n = static_cast<double>(size());
    return -0.5 * white_.squaredNorm() - logdet_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(inputs_.rows()); }
  double theta() const noexcept { return params_.theta; }
  /// The jitter the factorization actually used (after any escalation).
  double jitter() const noexcept { return jitter_; }
  double y_mean() const noexcept { return y_mean_; }
  double y_std() const noexcept { return y_std_; }
  const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const RowMatrix& chol() const noexcept { return chol_; }
  /// chol^{-1} * standardized values.
  const Eigen::VectorXd& whitened_values() const noexcept { return white_; }
  /// (K + jitter I)^{-1} * standardized values.
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  std::span<const double> column(std::size_t j) const {
    return {inputs_.data() + j * static_cast<std::size_t>(inputs_.rows()), static_cast<std::size_t>(inputs_.rows())};
  }
  std::span<const double> column(Eigen::Index j) const { return column(static_cast<std::size_t>(j)); }

 private:
  void standardize() {
    const double n = static_cast<double>(values_.size());
    double sum = 0.0;
    for (double y : values_) sum += y;
    y_mean_ = sum / n;
    double ss = 0.0;
    for (double y : values_) ss += (y - y_mean_) * (y - y_mean_);
    y_std_ = std::sqrt(ss / n);
    if (!(y_std_ >= 1e-12)) y_std_ = 1.0;
    standardized_.resize(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) standardized_[i] = (values_[i] - y_mean_) / y_std_;
  }

  // Cholesky-Banachiewicz: row j uses only rows 0..j.
  static bool factorize(const RowMatrix& gram, double jitter, RowMatrix& chol) {
    const auto n = gram.rows();
    chol.setZero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < j; ++k) {
        double s = gram(j, k);
        for (Eigen::Index i = 0; i < k; ++i) s -= chol(k, i) * chol(j, i);
        chol(j, k) = s / chol(k, k);
      }
      double d = gram(j, j) + jitter;
      for (Eigen::Index i = 0; i < j; ++i) d -= chol(j, i) * chol(j, i);
      if (!(d > 0.0) || !std::isfinite(d)) return false;
      chol(j, j) = std::sqrt(d);
    }
    return true;
  }

  Eigen::MatrixXd inputs_;
  std::vector<double> values_;
  std::vector<double> standardized_;
  KernelParams params_;
  double jitter_ = 0.0;
  double y_mean_ = 0.0;
  double y_std_ = 1.0;
  RowMatrix chol_;
  Eigen::VectorXd white_;
  Eigen::VectorXd alpha_;
};

/// Normalized coordinates of every dataset point, one per column.
inline Eigen::MatrixXd normalized_inputs(const SearchSpace& space, const Dataset& data) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(space.dimension()), static_cast<Eigen::Index>(data.size()));
  for (std::size_t j = 0; j < data.size(); ++j)
    space.normalize_into(data.point(j).indices,
                         std::span<double>(x.data() + j * space.dimension(), space.dimension()));
  return x;
}

inline GpModel fit(const SearchSpace& space, const Dataset& data, KernelParams params) {
  return GpModel::fit(normalized_inputs(space, data), data.values(), params);
}

inline Posterior posterior(const GpModel& model, const SearchSpace& space, const DesignPoint& x) {
  return model.predict(space.normalize(x));
}

inline double log_marginal_likelihood(const SearchSpace& space, const Dataset& data, KernelParams params) {
  return fit(space, data, params).log_marginal_likelihood();
}

/// Grid length scale with the highest marginal likelihood; ties go to the smaller
/// theta. Candidates whose fit is ill-conditioned are skipped.
inline double select_theta(const Eigen::MatrixXd& inputs, const std::vector<double>& values,
                           std::span<const double> grid, double jitter = kDefaultJitter) {
  if (grid.empty()) throw PreconditionError("theta grid is empty");
  double best_theta = 0.0;
  double best_lml = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (double theta : grid) {
    if (!(theta > 0.0)) throw PreconditionError("theta grid entries must be positive");
    double lml = 0.0;
    try {
      lml = GpModel::fit(inputs, values, {theta, jitter}).log_marginal_likelihood();
    } catch (const IllConditionedError&) {
      continue;
    }
    if (!any || lml > best_lml || (lml == best_lml && theta < best_theta)) {
      best_theta = theta;
      best_lml = lml;
      any = true;
    }
  }
  if (!any) throw IllConditionedError("every theta candidate was ill-conditioned", kMaxJitter);
  return best_theta;
}

inline double select_theta(const SearchSpace& space, const Dataset& data, std::span<const double> grid,
                           double jitter = kDefaultJitter) {
  return select_theta(normalized_inputs(space, data), data.values(), grid, jitter);
}

}  // namespace pibo
