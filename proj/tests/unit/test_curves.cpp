#include "oracles.hpp"

#include "rlasso/curves.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rlasso;

namespace {

SweepResult one_cell_result(std::size_t successes, std::size_t trials) {
  SweepResult r;
  r.config.p_list = {128};
  r.config.regimes = {SparsityRegime::sublinear};
  r.config.theta_grid = {1.0L};
  r.config.trials = trials;
  SweepCell cell;
  cell.p = 128;
  cell.regime = SparsityRegime::sublinear;
  cell.k = 8;
  cell.theta = 1;
  cell.n = 1069;
  cell.s = 534;
  cell.trials = trials;
  cell.successes_beta_and_e = successes;
  r.cells.push_back(cell);
  return r;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("Wilson interval") {
  const Interval i = wilson_interval(90, 100);
  CHECK(static_cast<double>(i.low) == doctest::Approx(0.8256).epsilon(2e-4));
  CHECK(static_cast<double>(i.high) == doctest::Approx(0.9448).epsilon(2e-4));
  for (std::size_t t : {1u, 7u, 100u}) {
    for (std::size_t s = 0; s <= t; s += std::max<std::size_t>(1, t / 7)) {
      double lo, hi;
      oracle::wilson(static_cast<double>(s), static_cast<double>(t), 1.959963984540054, lo, hi);
      const Interval w = wilson_interval(s, t);
      CHECK(static_cast<double>(w.low) == doctest::Approx(lo).epsilon(1e-12));
      CHECK(static_cast<double>(w.high) == doctest::Approx(hi).epsilon(1e-12));
      CHECK(w.low >= 0);
      CHECK(w.high <= 1);
    }
  }
  CHECK_THROWS_AS(wilson_interval(1, 0), InputError);
  CHECK_THROWS_AS(wilson_interval(3, 2), InputError);
}

TEST_CASE("empty result gives a header-only CSV") {
  SweepResult r;
  r.config.p_list = {128};
  r.config.regimes = {SparsityRegime::sublinear};
  const std::vector<Curve> curves = curves_from_result(r);
  REQUIRE(curves.size() == 1);
  CHECK(curves[0].points.empty());
  const std::string csv = curve_to_csv(curves[0]);
  CHECK(csv == "# rlasso-curve schema_version=1 p=128 regime=sublinear\ntheta,n,success_rate,ci_low,ci_high\n");
  const Curve back = curve_from_csv(csv);
  CHECK(back.points.empty());
  CHECK(back.p == 128);
}

TEST_CASE("single-cell curve and CSV round trip") {
  const std::vector<Curve> curves = curves_from_result(one_cell_result(90, 100));
  REQUIRE(curves.size() == 1);
  REQUIRE(curves[0].points.size() == 1);
  const CurvePoint& pt = curves[0].points[0];
  CHECK(pt.success_rate == 0.9);
  CHECK(pt.n == 1069);
  double lo, hi;
  oracle::wilson(90, 100, 1.959963984540054, lo, hi);
  CHECK(pt.ci_low == doctest::Approx(lo).epsilon(1e-12));
  CHECK(pt.ci_high == doctest::Approx(hi).epsilon(1e-12));
  const std::string csv = curve_to_csv(curves[0]);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const Curve back = curve_from_csv(csv);
  REQUIRE(back.points.size() == 1);
  CHECK(back.points[0].theta == pt.theta);
  CHECK(back.points[0].ci_low == pt.ci_low);
  CHECK(back.points[0].ci_high == pt.ci_high);
  CHECK(curve_to_csv(back) == csv);
  CHECK_THROWS_AS(curve_from_csv("theta,n\n1,2\n"), ParseError);
}

TEST_CASE("curve files are written per (p, regime)") {
  const auto dir = std::filesystem::temp_directory_path() / "rlasso_curves_test";
  std::filesystem::remove_all(dir);
  const SweepResult r = one_cell_result(40, 50);
  const auto csv = emit_curves(r, CurveFormat::csv, dir);
  REQUIRE(csv.size() == 1);
  CHECK(csv[0].filename() == "curve_p128_sublinear.csv");
  CHECK(curve_from_csv(slurp(csv[0])).points.size() == 1);
  const auto svg = emit_curves(r, CurveFormat::svg, dir);
  REQUIRE(svg.size() == 1);
  const std::string text = slurp(svg[0]);
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("polyline") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("isotonic residual and curve gap") {
  CHECK(isotonic_max_residual({0, 0.1, 0.5, 0.9, 1}) == 0);
  CHECK(isotonic_max_residual({}) == 0);
  CHECK(isotonic_max_residual({0.5, 0.3}) == doctest::Approx(0.1));
  CHECK(isotonic_max_residual({0, 0.6, 0.2, 1}) == doctest::Approx(0.2));

  Curve a, b;
  a.points = {{0.2, 10, 0.1, 0, 1}, {0.6, 20, 0.5, 0, 1}, {1.0, 30, 0.9, 0, 1}};
  b.points = {{0.2, 12, 0.9, 0, 1}, {0.6, 22, 0.8, 0, 1}, {1.0, 32, 0.95, 0, 1}};
  CHECK(max_curve_gap({a, b}, 0.5) == doctest::Approx(0.3));
  CHECK(max_curve_gap({a, b}, 0.0) == doctest::Approx(0.8));
  CHECK(max_curve_gap({a}, 0.0) == 0);
}
