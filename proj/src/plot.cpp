#include "mmnl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace mmnl {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (const char ch : text) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct LogAxis {
  double lo = 1.0;
  double hi = 10.0;

  static LogAxis covering(double min_v, double max_v) {
    LogAxis a;
    a.lo = std::log10(min_v);
    a.hi = std::log10(max_v);
    if (a.hi - a.lo < 1e-9) {
      a.lo -= 0.5;
      a.hi += 0.5;
    }
    const double pad = 0.05 * (a.hi - a.lo);
    a.lo -= pad;
    a.hi += pad;
    return a;
  }

  double frac(double v) const { return (std::log10(v) - lo) / (hi - lo); }

  std::vector<double> ticks() const {
    const bool sparse = hi - lo < 1.5;
    std::vector<double> out;
    for (int e = static_cast<int>(std::floor(lo)); e <= static_cast<int>(std::ceil(hi)); ++e) {
      for (const double mult : {1.0, 2.0, 5.0}) {
        if (!sparse && mult != 1.0) continue;
        const double v = mult * std::pow(10.0, e);
        const double l = std::log10(v);
        if (l >= lo && l <= hi) out.push_back(v);
      }
    }
    return out;
  }
};

using GroupKey = std::tuple<int, double>;  // (method, rank or d)

struct Curve {
  std::string label;
  std::map<double, std::pair<double, int>> sums;  // x -> (sum of rmse, count)
};

}  // namespace

PlotAxis plot_axis_from_string(const std::string& name) {
  if (name == "size") return PlotAxis::kSize;
  if (name == "per-row") return PlotAxis::kPerRow;
  throw DomainError("unknown plot axis '" + name + "' (expected size or per-row)");
}

std::string emit_plot(const std::vector<ExperimentRecord>& records, const PlotSpec& spec) {
  std::set<int> ranks;
  std::set<Method> methods;
  for (const ExperimentRecord& r : records) {
    ranks.insert(r.r);
    methods.insert(r.method);
  }

  std::map<GroupKey, Curve> curves;
  for (const ExperimentRecord& r : records) {
    if (!(std::isfinite(r.rmse) && r.rmse > 0.0)) continue;
    const double d = 0.5 * (r.m + r.n);
    double x = 0.0;
    GroupKey key;
    std::string label;
    if (spec.x_axis == PlotAxis::kSize) {
      x = d;
      key = {static_cast<int>(r.method), ranks.size() > 1 ? r.r : 0};
      label = to_string(r.method);
      if (ranks.size() > 1) label += " r=" + std::to_string(r.r);
    } else {
      x = static_cast<double>(r.T) / d;
      key = {static_cast<int>(r.method), d};
      label = (methods.size() > 1 ? to_string(r.method) + " " : std::string()) + "d=" +
              tick_label(d);
    }
    if (!(x > 0.0)) continue;
    Curve& c = curves[key];
    c.label = label;
    auto& cell = c.sums[x];
    cell.first += r.rmse;
    cell.second += 1;
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const std::string x_name = spec.x_axis == PlotAxis::kSize ? "problem size d = (m+n)/2"
                                                            : "observations per row T/d";

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-size=\"14\">" << xml_escape(spec.title) << "</text>\n";
  }
  svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w)
      << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 12)
      << "\" text-anchor=\"middle\">" << x_name << "</text>\n";
  svg << "<text x=\"16\" y=\"" << num(kTop + plot_h / 2) << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 16 " << num(kTop + plot_h / 2) << ")\">RMSE</text>\n";

  if (curves.empty()) {
    svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kTop + plot_h / 2)
        << "\" text-anchor=\"middle\" font-size=\"16\" fill=\"#888888\">no data</text>\n"
        << "</svg>\n";
    return svg.str();
  }

  double x_min = INFINITY, x_max = -INFINITY, y_min = INFINITY, y_max = -INFINITY;
  for (const auto& [key, c] : curves) {
    for (const auto& [x, cell] : c.sums) {
      const double y = cell.first / cell.second;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  const LogAxis xa = LogAxis::covering(x_min, x_max);
  const LogAxis ya = LogAxis::covering(y_min, y_max);
  auto px = [&](double x) { return kLeft + xa.frac(x) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - ya.frac(y)) * plot_h; };

  for (const double t : xa.ticks()) {
    svg << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\""
        << num(px(t)) << "\" y2=\"" << num(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (const double t : ya.ticks()) {
    svg << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\""
        << num(kLeft) << "\" y2=\"" << num(py(t)) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(t) + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }

  std::size_t index = 0;
  for (const auto& [key, c] : curves) {
    const char* color = kPalette[index % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& [x, cell] : c.sums) {
      svg << (first ? "" : " ") << num(px(x)) << ',' << num(py(cell.first / cell.second));
      first = false;
    }
    svg << "\"/>\n";
    for (const auto& [x, cell] : c.sums) {
      svg << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(cell.first / cell.second))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 12 + 18.0 * static_cast<double>(index);
    const double lx = kLeft + plot_w + 12;
    svg << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 20)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << num(lx + 26) << "\" y=\"" << num(ly + 4) << "\">" << c.label
        << "</text>\n";
    ++index;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string emit_plot(std::istream& results_csv, const PlotSpec& spec) {
  return emit_plot(parse_results_csv(results_csv), spec);
}

}  // namespace mmnl
