#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pibo/acquisition.hpp"
#include "pibo/dataset.hpp"
#include "pibo/errors.hpp"
#include "pibo/gp.hpp"
#include "pibo/rng.hpp"
#include "pibo/search_space.hpp"

namespace pibo {

/// Anything that maps a grid point to a real cost. Must be pure: workers call it concurrently.
template <class F>
concept Objective = std::invocable<const F&, const DesignPoint&> &&
                    std::convertible_to<std::invoke_result_t<const F&, const DesignPoint&>, double>;

enum class Phase { Init, Acquire, Final };

inline std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::Init: return "init";
    case Phase::Acquire: return "acquire";
    case Phase::Final: return "final";
  }
  return "?";
}

struct TraceRecord {
  std::size_t eval_index = 0;
  std::size_t worker_id = 0;
  Phase phase = Phase::Init;
  DesignPoint point;
  double objective_value = 0.0;
  /// Criterion value that picked the point; NaN for random initial samples.
  double acquisition_score = std::numeric_limits<double>::quiet_NaN();
  double incumbent_best_value = 0.0;
  DesignPoint incumbent_best_point;
};

struct RunTrace {
  std::vector<TraceRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }

  /// Appends a record, filling eval_index and the running incumbent.
  void append(std::size_t worker_id, Phase phase, DesignPoint point, double value, double score) {
    TraceRecord r;
    r.eval_index = records.size();
    r.worker_id = worker_id;
    r.phase = phase;
    r.objective_value = value;
    r.acquisition_score = score;
    if (records.empty() || value < records.back().incumbent_best_value) {
      r.incumbent_best_value = value;
      r.incumbent_best_point = point;
    } else {
      r.incumbent_best_value = records.back().incumbent_best_value;
      r.incumbent_best_point = records.back().incumbent_best_point;
    }
    r.point = std::move(point);
    records.push_back(std::move(r));
  }
};

enum class ThetaPolicy { Fixed, MaxLikelihood };

struct ThetaSchedule {
  ThetaPolicy policy = ThetaPolicy::MaxLikelihood;
  double theta = 0.5;  ///< used as-is under Fixed, and before the first selection otherwise
  std::vector<double> grid = kDefaultThetaGrid;
  std::size_t refit_every = 10;  ///< reselect after this many new observations
};

/// Optional early stop: no incumbent improvement beyond rel_tol for `patience`
/// consecutive acquisitions. patience 0 disables it.
struct StallRule {
  std::size_t patience = 0;
  double rel_tol = 1e-6;
};

struct BoConfig {
  std::size_t init_samples = 10;
  std::size_t iterations = 50;
  ThetaSchedule theta;
  double jitter = kDefaultJitter;
  AcquisitionConfig acquisition;
  StallRule stall;
  std::uint64_t seed = 0;

  void validate() const {
    if (init_samples < 1) throw PreconditionError("init_samples must be >= 1");
    KernelParams{theta.theta, jitter}.validate();
    if (theta.policy == ThetaPolicy::MaxLikelihood) {
      if (theta.grid.empty()) throw PreconditionError("theta grid is empty");
      for (double t : theta.grid)
        if (!(t > 0.0)) throw PreconditionError("theta grid entries must be positive");
      if (theta.refit_every < 1) throw PreconditionError("theta refit_every must be >= 1");
    }
    acquisition.validate();
    if (!(stall.rel_tol >= 0.0)) throw PreconditionError("stall rel_tol must be >= 0");
  }
};

enum class StopReason { Budget, Exhausted, Stalled };

inline std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Budget: return "budget";
    case StopReason::Exhausted: return "exhausted";
    case StopReason::Stalled: return "stalled";
  }
  return "?";
}

/// Whether an acquisition loop should stop. `trace` holds the loop's own records;
/// every non-init record counts against `config.iterations`.
inline std::optional<StopReason> stopping_check(const RunTrace& trace, const BoConfig& config,
                                                std::uint64_t unvisited) {
  const auto acquisitions = static_cast<std::size_t>(std::count_if(
      trace.records.begin(), trace.records.end(), [](const TraceRecord& r) { return r.phase != Phase::Init; }));
  if (acquisitions >= config.iterations) return StopReason::Budget;
  if (unvisited == 0) return StopReason::Exhausted;
  const auto patience = config.stall.patience;
  if (patience > 0 && acquisitions >= patience && trace.size() > patience) {
    const double before = trace.records[trace.size() - patience - 1].incumbent_best_value;
    const double now = trace.records.back().incumbent_best_value;
    if (before - now <= config.stall.rel_tol * std::abs(before)) return StopReason::Stalled;
  }
  return std::nullopt;
}

struct BoResult {
  Dataset dataset;
  RunTrace trace;
  StopReason stop_reason = StopReason::Budget;
};

/// An objective evaluation threw. Carries everything evaluated before the failure.
class RunAborted : public Error {
 public:
  RunAborted(const std::string& what, RunTrace partial)
      : Error("run aborted: " + what), partial_(std::move(partial)) {}

  const RunTrace& partial_trace() const noexcept { return partial_; }

 private:
  RunTrace partial_;
};

namespace detail {

template <Objective F>
double evaluate_or_abort(const F& objective, const DesignPoint& point, const RunTrace& trace) {
  try {
    return static_cast<double>(std::invoke(objective, point));
  } catch (const std::exception& e) {
    throw RunAborted(e.what(), trace);
  }
}

}  // namespace detail

/// Steps 2-4 of the BO loop: fit, acquire, evaluate, until `config.iterations`
/// acquisitions, exhaustion, or a stall. Appends to `data` and `trace` in place.
template <Objective F>
StopReason continue_bo(const SearchSpace& space, const F& objective, const BoConfig& config, Phase phase,
                       std::size_t worker_id, Dataset& data, RunTrace& trace) {
  config.validate();
  if (data.empty()) throw PreconditionError("the acquisition loop needs at least one observation");

  VisitedSet visited;
  for (const auto& p : data.points()) visited.insert(space.flat_index(p));

  const bool exhaustive = space.total_count() <= config.acquisition.candidate_cap;
  std::optional<CandidateScorer> scorer;
  if (exhaustive) scorer.emplace(CandidateScorer::exhaustive(space));

  double theta = config.theta.theta;
  std::optional<std::size_t> theta_chosen_at;
  const std::uint64_t stream = derive_seed(config.seed, 1);

  for (std::size_t step = 0;; ++step) {
    if (auto stop = stopping_check(trace, config, space.total_count() - data.size())) return *stop;

    if (config.theta.policy == ThetaPolicy::MaxLikelihood &&
        (!theta_chosen_at || data.size() - *theta_chosen_at >= config.theta.refit_every)) {
      theta = select_theta(space, data, config.theta.grid, config.jitter);
      theta_chosen_at = data.size();
    }
    const GpModel model = fit(space, data, {theta, config.jitter});
    auto next = scorer ? scorer->select(model, visited, config.acquisition)
                       : select_next(model, space, visited, config.acquisition, derive_seed(stream, step));
    if (!next) return StopReason::Exhausted;

    const double value = detail::evaluate_or_abort(objective, next->point, trace);
    visited.insert(next->flat_index);
    data.add(next->point, value);
    trace.append(worker_id, phase, std::move(next->point), value, next->score);
  }
}

/// Classic BO: `init_samples` uniform random points, then `iterations` acquisitions.
template <Objective F>
BoResult run_bo(const SearchSpace& space, const F& objective, const BoConfig& config, std::size_t worker_id = 0) {
  config.validate();
  if (config.init_samples + config.iterations > space.total_count())
    throw PreconditionError("init_samples + iterations exceeds the grid size " +
                            std::to_string(space.total_count()));
  BoResult result;
  for (auto& point : space.sample_uniform(config.init_samples, derive_seed(config.seed, 0))) {
    const double value = detail::evaluate_or_abort(objective, point, result.trace);
    result.dataset.add(point, value);
    result.trace.append(worker_id, Phase::Init, std::move(point), value,
                        std::numeric_limits<double>::quiet_NaN());
  }
  result.stop_reason = continue_bo(space, objective, config, Phase::Acquire, worker_id, result.dataset, result.trace);
  return result;
}

}  // namespace pibo
