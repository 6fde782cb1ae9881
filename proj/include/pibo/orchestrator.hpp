#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pibo/bo_engine.hpp"
#include "pibo/dataset.hpp"
#include "pibo/errors.hpp"
#include "pibo/rng.hpp"
#include "pibo/search_space.hpp"

namespace pibo {

struct PiboConfig {
  std::size_t workers = 4;
  /// Template for each phase-1 worker; its `iterations` is the per-worker acquisition
  /// count and its `seed` is replaced by a seed derived from `master_seed`.
  BoConfig per_worker;
  /// Acquisitions of the final BO on the merged data.
  std::size_t final_iterations = 20;
  std::uint64_t master_seed = 0;
  /// Run phase-1 workers on their own threads. The result does not depend on it.
  bool concurrent = true;

  std::size_t evaluation_budget() const {
    return workers * (per_worker.init_samples + per_worker.iterations) + final_iterations;
  }

  std::uint64_t worker_seed(std::size_t worker) const { return derive_seed(master_seed, worker); }
  std::uint64_t final_seed() const { return derive_seed(master_seed, workers); }

  void validate() const {
    if (workers < 1) throw PreconditionError("pibo needs at least one worker");
    per_worker.validate();
  }
};

struct PiboResult {
  /// Merged phase-1 data (canonical order) followed by the final BO's points.
  Dataset dataset;
  /// Phase-1 records interleaved round-robin by per-worker step, then the final BO.
  /// The final BO's records carry worker_id == workers.
  RunTrace trace;
  DesignPoint best_point;
  double best_value = 0.0;
  std::size_t merged_size = 0;
  StopReason final_stop = StopReason::Budget;
};

/// Union of observations keyed by grid point, sorted row-major. Repeated points
/// must agree within 1e-9.
inline Dataset merge_datasets(std::span<const Dataset> parts) {
  std::map<IndexTuple, std::pair<const DesignPoint*, double>> merged;
  for (const auto& part : parts) {
    for (std::size_t i = 0; i < part.size(); ++i) {
      const auto& p = part.point(i);
      const double v = part.value(i);
      auto [it, inserted] = merged.try_emplace(p.indices, &p, v);
      if (!inserted && std::abs(it->second.second - v) > 1e-9)
        throw DataIntegrityError("inconsistent values for a repeated grid point: " +
                                 std::to_string(it->second.second) + " vs " + std::to_string(v));
    }
  }
  Dataset out;
  for (const auto& [key, entry] : merged) out.add(*entry.first, entry.second);
  return out;
}

inline Dataset merge_datasets(std::initializer_list<Dataset> parts) {
  return merge_datasets(std::span<const Dataset>(parts.begin(), parts.size()));
}

/// Parallel BO: independent workers, merge, then one BO over the merged data.
template <Objective F>
PiboResult run_pibo(const SearchSpace& space, const F& objective, const PiboConfig& config) {
  config.validate();
  if (config.evaluation_budget() > space.total_count())
    throw PreconditionError("pibo budget " + std::to_string(config.evaluation_budget()) +
                            " exceeds the grid size " + std::to_string(space.total_count()));

  const std::size_t m = config.workers;
  std::vector<std::optional<BoResult>> results(m);
  std::vector<std::exception_ptr> failures(m);
  auto work = [&](std::size_t w) {
    try {
      BoConfig cfg = config.per_worker;
      cfg.seed = config.worker_seed(w);
      results[w] = run_bo(space, objective, cfg, w);
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (config.concurrent && m > 1) {
    std::vector<std::jthread> threads;
    threads.reserve(m);
    for (std::size_t w = 0; w < m; ++w) threads.emplace_back(work, w);
  } else {
    for (std::size_t w = 0; w < m; ++w) work(w);
  }
  for (std::size_t w = 0; w < m; ++w) {
    if (!failures[w]) continue;
    try {
      std::rethrow_exception(failures[w]);
    } catch (const RunAborted& e) {
      throw RunAborted("worker " + std::to_string(w) + ": " + e.what(), e.partial_trace());
    } catch (const std::exception& e) {
      throw RunAborted("worker " + std::to_string(w) + ": " + e.what(), {});
    }
  }

  PiboResult out;
  // Round-robin interleave: step k of every worker precedes step k + 1 of any.
  std::size_t longest = 0;
  for (const auto& r : results) longest = std::max(longest, r->trace.size());
  for (std::size_t k = 0; k < longest; ++k)
    for (const auto& r : results)
      if (k < r->trace.size()) {
        const auto& rec = r->trace.records[k];
        out.trace.append(rec.worker_id, rec.phase, rec.point, rec.objective_value, rec.acquisition_score);
      }

  std::vector<Dataset> parts;
  parts.reserve(m);
  for (auto& r : results) parts.push_back(std::move(r->dataset));
  Dataset data = merge_datasets(parts);
  out.merged_size = data.size();

  BoConfig final_cfg = config.per_worker;
  final_cfg.iterations = config.final_iterations;
  final_cfg.seed = config.final_seed();
  RunTrace final_trace;
  try {
    out.final_stop = continue_bo(space, objective, final_cfg, Phase::Final, m, data, final_trace);
  } catch (const RunAborted& e) {
    RunTrace partial = out.trace;
    for (const auto& rec : e.partial_trace().records)
      partial.append(rec.worker_id, rec.phase, rec.point, rec.objective_value, rec.acquisition_score);
    throw RunAborted(std::string("final phase: ") + e.what(), std::move(partial));
  }
  for (auto& rec : final_trace.records)
    out.trace.append(rec.worker_id, rec.phase, std::move(rec.point), rec.objective_value, rec.acquisition_score);

  const auto best = data.argmin();
  out.best_point = data.point(best);
  out.best_value = data.value(best);
  out.dataset = std::move(data);
  return out;
}

}  // namespace pibo
