#pragma once

#include "rlasso/experiments.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rlasso {

inline constexpr int kCurveSchemaVersion = 1;

struct Interval {
  Real low = 0;
  Real high = 1;
};

/// Wilson score interval; z defaults to the 95% two-sided quantile.
Interval wilson_interval(std::size_t successes, std::size_t trials, Real z = 1.959963984540054L);

struct CurvePoint {
  double theta = 0;
  Index n = 0;
  double success_rate = 0;
  double ci_low = 0;
  double ci_high = 1;
};

struct Curve {
  Index p = 0;
  SparsityRegime regime = SparsityRegime::sublinear;
  std::vector<CurvePoint> points;
};

/// One curve per (p, regime) of the config, in config order.
std::vector<Curve> curves_from_result(const SweepResult& result);

/// "# rlasso-curve schema_version=1 p=... regime=..." then
/// "theta,n,success_rate,ci_low,ci_high" and one row per point. Numbers use
/// the shortest round-trip representation.
std::string curve_to_csv(const Curve& curve);
Curve curve_from_csv(const std::string& text);

/// Self-contained SVG line plot of success rate against theta.
std::string curves_to_svg(const std::vector<Curve>& curves, const std::string& title);

enum class CurveFormat { csv, svg };

/// Writes curve_p<p>_<regime>.csv per curve, or one curves.svg. Returns the paths.
std::vector<std::filesystem::path> emit_curves(const SweepResult& result, CurveFormat format,
                                               const std::filesystem::path& directory);

/// Largest |rate - fit| after a non-decreasing isotonic (pool adjacent violators) fit.
double isotonic_max_residual(const std::vector<double>& rates);

/// Largest spread between curves at shared theta values >= theta_min.
double max_curve_gap(const std::vector<Curve>& curves, double theta_min);

}  // namespace rlasso
