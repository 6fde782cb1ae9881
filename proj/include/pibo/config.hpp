#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pibo/bo_engine.hpp"
#include "pibo/errors.hpp"
#include "pibo/orchestrator.hpp"
#include "pibo/search_space.hpp"
#include "pibo/stripline.hpp"

namespace pibo {

struct OutputPaths {
  std::string trace;
  std::string dataset;
  std::string report;
};

/// Everything a CLI run needs, validated.
struct RunConfig {
  std::vector<AxisSpec> axes;
  stripline::ObjectiveSpec objective;
  BoConfig bo;
  PiboConfig pibo;
  OutputPaths output;
  std::uint64_t seed = 0;
  /// Non-fatal findings, e.g. a grid whose geometry can never be valid.
  std::vector<std::string> warnings;

  SearchSpace space() const { return SearchSpace(axes); }

  /// PIBO settings with the BO block as worker template and `seed` as master seed.
  PiboConfig pibo_config() const {
    PiboConfig p = pibo;
    p.per_worker = bo;
    p.master_seed = seed;
    return p;
  }

  BoConfig solo_config() const {
    BoConfig b = bo;
    b.seed = seed;
    return b;
  }
};

namespace config_detail {

using nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }
inline std::string join(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
}

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.contains(key)) throw ConfigError(join(path, key), "unknown key");
}

inline const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

inline std::uint64_t get_count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

inline std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

template <class T, class Fn>
void optional_field(const json& j, const std::string& path, const char* key, T& target, Fn&& read) {
  if (const json* v = find(j, key)) target = read(*v, join(path, key));
}

inline std::vector<AxisSpec> parse_space(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of axes");
  std::vector<AxisSpec> axes;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto p = join(path, i);
    const json& a = j[i];
    require_object(a, p);
    reject_unknown(a, p, {"name", "min", "max", "step"});
    AxisSpec axis;
    for (const char* key : {"name", "min", "max", "step"})
      if (!find(a, key)) throw ConfigError(join(p, key), "missing field");
    axis.name = get_string(a["name"], join(p, "name"));
    axis.min = get_number(a["min"], join(p, "min"));
    axis.max = get_number(a["max"], join(p, "max"));
    axis.step = get_number(a["step"], join(p, "step"));
    try {
      axis.validate();
    } catch (const PreconditionError& e) {
      throw ConfigError(p, e.what());
    }
    axes.push_back(axis);
  }
  static const char* expected[] = {"W", "S", "T", "H1", "H2", "er"};
  if (axes.size() != 6) throw ConfigError(path, "the stripline objective needs exactly six axes W,S,T,H1,H2,er");
  for (std::size_t i = 0; i < 6; ++i)
    if (axes[i].name != expected[i])
      throw ConfigError(join(join(path, i), "name"), std::string("expected axis '") + expected[i] + "'");
  return axes;
}

inline stripline::ObjectiveSpec parse_objective(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"z_t", "mode", "loss_weight", "f0_ghz", "tan_delta", "conductor_coeff"});
  stripline::ObjectiveSpec spec;
  optional_field(j, path, "z_t", spec.target_impedance, get_number);
  optional_field(j, path, "f0_ghz", spec.f0_ghz, get_number);
  optional_field(j, path, "tan_delta", spec.tan_delta, get_number);
  optional_field(j, path, "conductor_coeff", spec.conductor_coeff, get_number);
  if (const json* w = find(j, "loss_weight")) spec.loss_weight = get_number(*w, join(path, "loss_weight"));
  if (const json* m = find(j, "mode")) {
    const auto mode = get_string(*m, join(path, "mode"));
    if (mode == "minimize_loss")
      spec.mode = stripline::LossMode::MinimizeLoss;
    else if (mode == "maximize_loss")
      spec.mode = stripline::LossMode::MaximizeLoss;
    else
      throw ConfigError(join(path, "mode"), "expected 'minimize_loss' or 'maximize_loss'");
  }
  try {
    spec.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(path, e.what());
  }
  return spec;
}

inline ThetaSchedule parse_theta(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"policy", "value", "grid", "refit_every"});
  ThetaSchedule t;
  if (const json* p = find(j, "policy")) {
    const auto policy = get_string(*p, join(path, "policy"));
    if (policy == "fixed")
      t.policy = ThetaPolicy::Fixed;
    else if (policy == "max_likelihood")
      t.policy = ThetaPolicy::MaxLikelihood;
    else
      throw ConfigError(join(path, "policy"), "expected 'fixed' or 'max_likelihood'");
  }
  optional_field(j, path, "value", t.theta, get_number);
  if (!(t.theta > 0.0)) throw ConfigError(join(path, "value"), "theta must be positive");
  if (const json* g = find(j, "grid")) {
    const auto gp = join(path, "grid");
    if (!g->is_array() || g->empty()) throw ConfigError(gp, "expected a non-empty array");
    t.grid.clear();
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double v = get_number((*g)[i], join(gp, i));
      if (!(v > 0.0)) throw ConfigError(join(gp, i), "theta must be positive");
      t.grid.push_back(v);
    }
  }
  t.refit_every = get_count(j.value("refit_every", json(t.refit_every)), join(path, "refit_every"));
  if (t.refit_every < 1) throw ConfigError(join(path, "refit_every"), "must be >= 1");
  return t;
}

inline AcquisitionConfig parse_acquisition(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"kind", "tau", "xi", "candidate_cap", "subset_size"});
  AcquisitionConfig a;
  if (const json* k = find(j, "kind")) {
    const auto kind = get_string(*k, join(path, "kind"));
    if (kind == "LCB")
      a.kind = AcquisitionKind::LCB;
    else if (kind == "PI")
      a.kind = AcquisitionKind::PI;
    else if (kind == "EI")
      a.kind = AcquisitionKind::EI;
    else
      throw ConfigError(join(path, "kind"), "expected 'LCB', 'PI' or 'EI'");
  }
  optional_field(j, path, "tau", a.tau, get_number);
  if (!(a.tau >= 0.0)) throw ConfigError(join(path, "tau"), "must be >= 0");
  optional_field(j, path, "xi", a.xi, get_number);
  if (!(a.xi >= 0.0)) throw ConfigError(join(path, "xi"), "must be >= 0");
  optional_field(j, path, "candidate_cap", a.candidate_cap, get_count);
  optional_field(j, path, "subset_size", a.subset_size, get_count);
  if (a.subset_size == 0) throw ConfigError(join(path, "subset_size"), "must be positive");
  return a;
}

inline BoConfig parse_bo(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"init_samples", "iterations", "jitter", "theta", "acquisition", "stall"});
  BoConfig b;
  optional_field(j, path, "init_samples", b.init_samples, get_count);
  if (b.init_samples < 1) throw ConfigError(join(path, "init_samples"), "must be >= 1");
  optional_field(j, path, "iterations", b.iterations, get_count);
  optional_field(j, path, "jitter", b.jitter, get_number);
  if (!(b.jitter >= 0.0 && b.jitter <= 1e-3)) throw ConfigError(join(path, "jitter"), "must lie in [0, 1e-3]");
  if (const json* t = find(j, "theta")) b.theta = parse_theta(*t, join(path, "theta"));
  if (const json* a = find(j, "acquisition")) b.acquisition = parse_acquisition(*a, join(path, "acquisition"));
  if (const json* s = find(j, "stall")) {
    const auto sp = join(path, "stall");
    require_object(*s, sp);
    reject_unknown(*s, sp, {"patience", "rel_tol"});
    optional_field(*s, sp, "patience", b.stall.patience, get_count);
    optional_field(*s, sp, "rel_tol", b.stall.rel_tol, get_number);
    if (!(b.stall.rel_tol >= 0.0)) throw ConfigError(join(sp, "rel_tol"), "must be >= 0");
  }
  return b;
}

inline PiboConfig parse_pibo(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"workers", "final_iterations", "concurrent"});
  PiboConfig p;
  optional_field(j, path, "workers", p.workers, get_count);
  if (p.workers < 1) throw ConfigError(join(path, "workers"), "must be >= 1");
  optional_field(j, path, "final_iterations", p.final_iterations, get_count);
  optional_field(j, path, "concurrent", p.concurrent, get_bool);
  return p;
}

}  // namespace config_detail

/// Validates a JSON document against the run-config schema. Unknown keys are errors.
inline RunConfig parse_config_json(const nlohmann::json& root) {
  using namespace config_detail;
  require_object(root, "");
  reject_unknown(root, "", {"seed", "space", "objective", "bo", "pibo", "output"});
  RunConfig cfg;
  const json* space = find(root, "space");
  if (!space) throw ConfigError("/space", "missing field");
  cfg.axes = parse_space(*space, "/space");
  if (const json* s = find(root, "seed")) cfg.seed = get_count(*s, "/seed");
  if (const json* o = find(root, "objective")) cfg.objective = parse_objective(*o, "/objective");
  if (const json* b = find(root, "bo")) cfg.bo = parse_bo(*b, "/bo");
  if (const json* p = find(root, "pibo")) cfg.pibo = parse_pibo(*p, "/pibo");
  if (const json* o = find(root, "output")) {
    require_object(*o, "/output");
    reject_unknown(*o, "/output", {"trace", "dataset", "report"});
    optional_field(*o, "/output", "trace", cfg.output.trace, get_string);
    optional_field(*o, "/output", "dataset", cfg.output.dataset, get_string);
    optional_field(*o, "/output", "report", cfg.output.report, get_string);
  }
  cfg.pibo.per_worker = cfg.bo;
  cfg.pibo.master_seed = cfg.seed;

  // Axis order is fixed: W, S, T, H1, H2, er.
  const auto& t = cfg.axes[2];
  const auto& h1 = cfg.axes[3];
  const auto& h2 = cfg.axes[4];
  if (h1.min + t.min >= h2.max)
    cfg.warnings.push_back("no grid point has a valid stripline geometry: min(H1) + min(T) = " +
                           std::to_string(h1.min + t.min) + " >= max(H2) = " + std::to_string(h2.max));
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ConfigError("", "config is empty");
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config_json(root);
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

}  // namespace pibo
