#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pibo/bo_engine.hpp"
#include "pibo/dataset.hpp"
#include "pibo/errors.hpp"
#include "pibo/oracle_bench.hpp"
#include "pibo/search_space.hpp"

namespace pibo::io {

/// Physical values: 6 significant digits.
inline std::string format_physical(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Objective-scale values: round-trip exact.
inline std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// (z_diff, loss) for a point, when the objective has such metrics.
using MetricsFn = std::function<std::optional<std::pair<double, double>>(const DesignPoint&)>;

inline std::string trace_header(const SearchSpace& space) {
  std::string h = "eval_index,worker_id,phase";
  for (const auto& axis : space.axes()) h += "," + axis.name;
  return h + ",z_diff,loss,objective,best_value";
}

/// One row per evaluation. With the stripline grid the header reads
/// eval_index,worker_id,phase,W,S,T,H1,H2,er,z_diff,loss,objective,best_value.
inline void write_trace_csv(std::ostream& out, const SearchSpace& space, const RunTrace& trace,
                            const MetricsFn& metrics = {}) {
  out << trace_header(space) << '\n';
  for (const auto& r : trace.records) {
    out << r.eval_index << ',' << r.worker_id << ',' << to_string(r.phase);
    for (double v : r.point.values) out << ',' << format_physical(v);
    std::optional<std::pair<double, double>> m;
    if (metrics) m = metrics(r.point);
    if (m)
      out << ',' << format_exact(m->first) << ',' << format_exact(m->second);
    else
      out << ",,";
    out << ',' << format_exact(r.objective_value) << ',' << format_exact(r.incumbent_best_value) << '\n';
  }
}

struct TraceRow {
  std::size_t eval_index = 0;
  std::size_t worker_id = 0;
  std::string phase;
  /// Grid point re-decoded from the printed physical values.
  DesignPoint point;
  std::optional<double> z_diff;
  std::optional<double> loss;
  double objective = 0.0;
  double best_value = 0.0;
};

/// Nearest grid index for a printed physical value.
inline std::uint32_t nearest_index(const AxisSpec& axis, double value) {
  const double pos = std::round((value - axis.min) / axis.step);
  if (pos < 0.0 || pos > static_cast<double>(axis.cardinality() - 1))
    throw BoundsError("value " + format_physical(value) + " is off the grid of axis '" + axis.name + "'");
  return static_cast<std::uint32_t>(pos);
}

inline std::vector<TraceRow> read_trace_csv(std::istream& in, const SearchSpace& space) {
  std::string line;
  if (!std::getline(in, line)) throw Error("trace file is empty");
  if (line != trace_header(space)) throw Error("unexpected trace header: " + line);
  const std::size_t d = space.dimension();
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != d + 7) throw Error("trace row has " + std::to_string(f.size()) + " fields: " + line);
    TraceRow row;
    row.eval_index = std::stoull(f[0]);
    row.worker_id = std::stoull(f[1]);
    row.phase = f[2];
    IndexTuple idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = nearest_index(space.axis(i), std::stod(f[3 + i]));
    row.point = space.point_from_indices(idx);
    if (!f[3 + d].empty()) row.z_diff = std::stod(f[3 + d]);
    if (!f[4 + d].empty()) row.loss = std::stod(f[4 + d]);
    row.objective = std::stod(f[5 + d]);
    row.best_value = std::stod(f[6 + d]);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// flat_index, one column per axis (physical value), objective.
inline void write_dataset_csv(std::ostream& out, const SearchSpace& space, const Dataset& data) {
  out << "flat_index";
  for (const auto& axis : space.axes()) out << ',' << axis.name;
  out << ",objective\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << space.flat_index(data.point(i));
    for (double v : data.point(i).values) out << ',' << format_physical(v);
    out << ',' << format_exact(data.value(i)) << '\n';
  }
}

inline void write_bench_csv(std::ostream& out, const SearchSpace& space, const BenchReport& report) {
  out << "seed,total_evaluations,best_value";
  for (const auto& axis : space.axes()) out << ',' << axis.name;
  out << ",evals_to_within_tol,evals_to_global,hit_global,failed,error\n";
  for (const auto& r : report.records) {
    out << r.seed << ',' << r.total_evaluations << ',' << format_exact(r.best_value);
    for (std::size_t i = 0; i < space.dimension(); ++i)
      out << ',' << (r.best_point.values.size() == space.dimension() ? format_physical(r.best_point.values[i]) : "");
    out << ',' << (r.evals_to_within_tol ? std::to_string(*r.evals_to_within_tol) : "") << ','
        << (r.evals_to_global ? std::to_string(*r.evals_to_global) : "") << ',' << (r.hit_global ? 1 : 0) << ','
        << (r.failed ? 1 : 0) << ',';
    // Commas would break the row.
    std::string err = r.error;
    for (auto& c : err)
      if (c == ',' || c == '\n') c = ';';
    out << err << '\n';
  }
}

inline void write_comparison_csv(std::ostream& out, const Comparison& cmp) {
  out << "seed,solo_best,pibo_best,failed\n";
  for (const auto& r : cmp.rows)
    out << r.seed << ',' << format_exact(r.solo_best) << ',' << format_exact(r.pibo_best) << ','
        << (r.failed ? 1 : 0) << '\n';
}

}  // namespace pibo::io
