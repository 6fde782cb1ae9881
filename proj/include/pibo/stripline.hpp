#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "pibo/errors.hpp"
#include "pibo/search_space.hpp"

namespace pibo {

/// Closed-form edge-coupled offset stripline. It stands in for a 2D field solver:
/// smooth, deterministic and cheap enough to brute-force the whole grid.
///
/// Lengths are in mils, frequency in GHz, loss in dB/inch (positive).
///
///   b = H2, h_low = H1, h_up = H2 - H1 - T
///   Zss(s) = 60/sqrt(er) * ln(4 s / (0.67 pi (0.8 W + T)))
///   Z1 = Zss(2 h_low + T), Z2 = Zss(2 h_up + T), Z0 = 2 Z1 Z2 / (Z1 + Z2)
///   z_diff = 2 Z0 (1 - 0.347 exp(-2.9 S / b))
///   loss = 2.3 f0 sqrt(er) tan_delta + k_c sqrt(f0) / (Z0 W)
namespace stripline {

enum class LossMode {
  MinimizeLoss,  ///< |z_diff - Z_T| + 100 * loss
  MaximizeLoss,  ///< |z_diff - Z_T| + 40 / loss
};

inline std::string to_string(LossMode mode) {
  return mode == LossMode::MinimizeLoss ? "minimize_loss" : "maximize_loss";
}

struct ObjectiveSpec {
  double target_impedance = 85.0;
  LossMode mode = LossMode::MinimizeLoss;
  /// Defaults to 100 (minimize) or 40 (maximize).
  std::optional<double> loss_weight;
  double f0_ghz = 4.0;
  double tan_delta = 0.02;
  double conductor_coeff = 36.0;

  double effective_loss_weight() const {
    if (loss_weight) return *loss_weight;
    return mode == LossMode::MinimizeLoss ? 100.0 : 40.0;
  }

  void validate() const {
    if (!(target_impedance > 0.0)) throw PreconditionError("target impedance must be positive");
    if (!(f0_ghz > 0.0)) throw PreconditionError("f0 must be positive");
    if (!(tan_delta > 0.0 && tan_delta < 0.1)) throw PreconditionError("tan_delta must lie in (0, 0.1)");
    if (!(conductor_coeff > 0.0)) throw PreconditionError("conductor coefficient must be positive");
    if (loss_weight && !(*loss_weight >= 0.0)) throw PreconditionError("loss weight must be >= 0");
  }
};

struct Geometry {
  double w = 0.0;   ///< trace width
  double s = 0.0;   ///< trace spacing
  double t = 0.0;   ///< trace thickness
  double h1 = 0.0;  ///< core height (lower plane to trace)
  double h2 = 0.0;  ///< total dielectric height (plane to plane)
  double er = 0.0;  ///< dielectric constant

  /// Axis order W, S, T, H1, H2, er.
  static Geometry from_point(const DesignPoint& p) {
    if (p.values.size() != 6)
      throw PreconditionError("stripline objective needs a 6-axis point, got " + std::to_string(p.values.size()));
    return {p.values[0], p.values[1], p.values[2], p.values[3], p.values[4], p.values[5]};
  }
};

struct LineMetrics {
  double z_diff = 0.0;  ///< differential impedance, ohms
  double loss = 0.0;    ///< dB/inch at f0
  double z0 = 0.0;      ///< single-ended impedance of the offset line, ohms
};

inline LineMetrics line_metrics(const Geometry& g, const ObjectiveSpec& spec = {}) {
  if (!(g.er > 0.0) || !(g.w > 0.0) || !(g.t >= 0.0) || !(g.s > 0.0))
    throw InvalidGeometryError("W, S and er must be positive and T non-negative");
  const double b = g.h2;
  const double h_low = g.h1;
  const double h_up = g.h2 - g.h1 - g.t;
  if (!(h_up > 0.0))
    throw InvalidGeometryError("trace does not fit in the dielectric: H1 + T = " + std::to_string(g.h1 + g.t) +
                               " >= H2 = " + std::to_string(g.h2));
  if (!(h_low > 0.0)) throw InvalidGeometryError("core height H1 must be positive");

  const double width_term = 0.67 * std::numbers::pi * (0.8 * g.w + g.t);
  auto zss = [&](double spacing, const char* which) {
    const double arg = 4.0 * spacing / width_term;
    if (!(arg > 1.0))
      throw InvalidGeometryError(std::string("log argument <= 1 for the ") + which +
                                 " plane: trace too wide for the dielectric");
    return 60.0 / std::sqrt(g.er) * std::log(arg);
  };
  const double z1 = zss(2.0 * h_low + g.t, "lower");
  const double z2 = zss(2.0 * h_up + g.t, "upper");
  const double z0 = 2.0 * z1 * z2 / (z1 + z2);

  LineMetrics out;
  out.z0 = z0;
  out.z_diff = 2.0 * z0 * (1.0 - 0.347 * std::exp(-2.9 * g.s / b));
  const double alpha_d = 2.3 * spec.f0_ghz * std::sqrt(g.er) * spec.tan_delta;
  const double alpha_c = spec.conductor_coeff * std::sqrt(spec.f0_ghz) / (z0 * g.w);
  out.loss = alpha_d + alpha_c;
  return out;
}

inline LineMetrics line_metrics(const DesignPoint& p, const ObjectiveSpec& spec = {}) {
  return line_metrics(Geometry::from_point(p), spec);
}

/// Impedance mismatch plus weighted loss (or weighted inverse loss).
inline double objective(const LineMetrics& m, const ObjectiveSpec& spec = {}) {
  const double mismatch = std::abs(m.z_diff - spec.target_impedance);
  const double weight = spec.effective_loss_weight();
  return spec.mode == LossMode::MinimizeLoss ? mismatch + weight * m.loss : mismatch + weight / m.loss;
}

inline double objective(const DesignPoint& p, const ObjectiveSpec& spec = {}) {
  return objective(line_metrics(p, spec), spec);
}

/// Callable adaptor for the optimizers.
class StriplineObjective {
 public:
  explicit StriplineObjective(ObjectiveSpec spec = {}) : spec_(spec) { spec_.validate(); }

  double operator()(const DesignPoint& p) const { return objective(p, spec_); }
  LineMetrics metrics(const DesignPoint& p) const { return line_metrics(p, spec_); }
  const ObjectiveSpec& spec() const noexcept { return spec_; }

 private:
  ObjectiveSpec spec_;
};

}  // namespace stripline
}  // namespace pibo
