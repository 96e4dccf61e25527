#include "rlasso/curves.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace rlasso {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field) {
  double v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ParseError("curve csv: bad number '" + field + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

const char* kCsvColumns = "theta,n,success_rate,ci_low,ci_high";

}  // namespace

Interval wilson_interval(std::size_t successes, std::size_t trials, Real z) {
  if (trials == 0) throw InputError("wilson_interval: trials must be >= 1");
  if (successes > trials) throw InputError("wilson_interval: successes exceed trials");
  const Real n = static_cast<Real>(trials);
  const Real phat = static_cast<Real>(successes) / n;
  const Real z2 = z * z;
  const Real denom = 1 + z2 / n;
  const Real center = (phat + z2 / (2 * n)) / denom;
  const Real half = z / denom * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n));
  return {std::max(Real(0), center - half), std::min(Real(1), center + half)};
}

std::vector<Curve> curves_from_result(const SweepResult& result) {
  std::vector<Curve> curves;
  for (Index p : result.config.p_list) {
    for (SparsityRegime regime : result.config.regimes) {
      Curve curve;
      curve.p = p;
      curve.regime = regime;
      for (const SweepCell& c : cells_for(result, p, regime)) {
        const Interval ci = wilson_interval(c.successes_beta_and_e, c.trials);
        CurvePoint pt;
        pt.theta = static_cast<double>(c.theta);
        pt.n = c.n;
        pt.success_rate = static_cast<double>(c.successes_beta_and_e) / static_cast<double>(c.trials);
        pt.ci_low = static_cast<double>(ci.low);
        pt.ci_high = static_cast<double>(ci.high);
        curve.points.push_back(pt);
      }
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

std::string curve_to_csv(const Curve& curve) {
  std::ostringstream os;
  os << "# rlasso-curve schema_version=" << kCurveSchemaVersion << " p=" << curve.p
     << " regime=" << to_string(curve.regime) << '\n';
  os << kCsvColumns << '\n';
  for (const CurvePoint& pt : curve.points) {
    os << shortest(pt.theta) << ',' << pt.n << ',' << shortest(pt.success_rate) << ','
       << shortest(pt.ci_low) << ',' << shortest(pt.ci_high) << '\n';
  }
  return os.str();
}

Curve curve_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Curve curve;
  if (!std::getline(in, line) || line.rfind("# rlasso-curve", 0) != 0) {
    throw ParseError("curve csv: missing '# rlasso-curve' schema line");
  }
  for (const std::string& token : split(line.substr(2), ' ')) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "schema_version" && parse_double(value) != kCurveSchemaVersion) {
      throw ParseError("curve csv: unsupported schema_version");
    }
    if (key == "p") curve.p = static_cast<Index>(parse_double(value));
    if (key == "regime") curve.regime = sparsity_regime_from_string(value);
  }
  if (!std::getline(in, line) || line != kCsvColumns) throw ParseError("curve csv: unexpected header row");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw ParseError("curve csv: expected 5 columns");
    CurvePoint pt;
    pt.theta = parse_double(f[0]);
    pt.n = static_cast<Index>(parse_double(f[1]));
    pt.success_rate = parse_double(f[2]);
    pt.ci_low = parse_double(f[3]);
    pt.ci_high = parse_double(f[4]);
    curve.points.push_back(pt);
  }
  return curve;
}

std::string curves_to_svg(const std::vector<Curve>& curves, const std::string& title) {
  const double width = 640, height = 420, left = 60, right = 150, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  double theta_max = 0;
  for (const Curve& c : curves) {
    for (const CurvePoint& pt : c.points) theta_max = std::max(theta_max, pt.theta);
  }
  if (theta_max <= 0) theta_max = 1;
  auto sx = [&](double t) { return left + plot_w * t / theta_max; };
  auto sy = [&](double r) { return top + plot_h * (1 - r); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" data-schema=\"rlasso-curve-svg\" data-schema-version=\"" << kCurveSchemaVersion << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
     << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << sy(0) << "\" x2=\"" << left + plot_w << "\" y2=\""
     << sy(0) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << sy(0) << "\" x2=\"" << left << "\" y2=\"" << sy(1)
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double r = i / 5.0;
    os << "<text x=\"" << left - 8 << "\" y=\"" << sy(r) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
       << r << "</text>\n";
    const double t = theta_max * i / 5.0;
    os << "<text x=\"" << sx(t) << "\" y=\"" << sy(0) + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << shortest(std::round(t * 100) / 100) << "</text>\n";
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">rescaled sample size theta</text>\n";
  os << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 16 " << top + plot_h / 2
     << ")\" text-anchor=\"middle\" font-size=\"12\">success probability</text>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const Curve& c = curves[i];
    const char* color = palette[i % (sizeof palette / sizeof *palette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const CurvePoint& pt : c.points) os << sx(pt.theta) << ',' << sy(pt.success_rate) << ' ';
    os << "\"/>\n";
    const double ly = top + 16 * static_cast<double>(i);
    os << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 30
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << width - right + 35 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">p=" << c.p
       << " " << to_string(c.regime) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_curves(const SweepResult& result, CurveFormat format,
                                               const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const std::vector<Curve> curves = curves_from_result(result);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
    written.push_back(path);
  };
  if (format == CurveFormat::csv) {
    for (const Curve& c : curves) {
      write(directory / ("curve_p" + std::to_string(c.p) + "_" + to_string(c.regime) + ".csv"),
            curve_to_csv(c));
    }
  } else {
    write(directory / "curves.svg",
          curves_to_svg(curves, "Probability of exact signed-support recovery"));
  }
  return written;
}

double isotonic_max_residual(const std::vector<double>& rates) {
  struct Block {
    double sum;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (double r : rates) {
    blocks.push_back({r, 1});
    while (blocks.size() > 1) {
      const Block& b = blocks.back();
      const Block& a = blocks[blocks.size() - 2];
      if (a.sum / static_cast<double>(a.count) <= b.sum / static_cast<double>(b.count)) break;
      const Block merged{a.sum + b.sum, a.count + b.count};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  double worst = 0;
  std::size_t i = 0;
  for (const Block& b : blocks) {
    const double mean = b.sum / static_cast<double>(b.count);
    for (std::size_t j = 0; j < b.count; ++j, ++i) worst = std::max(worst, std::abs(rates[i] - mean));
  }
  return worst;
}

double max_curve_gap(const std::vector<Curve>& curves, double theta_min) {
  std::map<double, std::pair<double, double>> range;
  std::map<double, std::size_t> seen;
  for (const Curve& c : curves) {
    for (const CurvePoint& pt : c.points) {
      if (pt.theta < theta_min) continue;
      auto [it, fresh] = range.try_emplace(pt.theta, pt.success_rate, pt.success_rate);
      if (!fresh) {
        it->second.first = std::min(it->second.first, pt.success_rate);
        it->second.second = std::max(it->second.second, pt.success_rate);
      }
      ++seen[pt.theta];
    }
  }
  double gap = 0;
  for (const auto& [theta, lohi] : range) {
    if (seen[theta] > 1) gap = std::max(gap, lohi.second - lohi.first);
  }
  return gap;
}

}  // namespace rlasso
