#include "citedyn/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "citedyn/csv.hpp"
#include "citedyn/errors.hpp"

namespace citedyn {
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 55;
constexpr std::array<const char*, 6> kColours = {"#1f77b4", "#d62728", "#2ca02c",
                                                 "#9467bd", "#ff7f0e", "#8c564b"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0) * mag;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v, double step) {
  const int decimals = std::max(0, static_cast<int>(-std::floor(std::log10(step))));
  return csv::format_fixed(std::abs(v) < 1e-12 * step ? 0.0 : v, decimals);
}

void validate(const std::vector<PlotSeries>& series) {
  if (series.empty()) throw DataError("plot: no series");
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw DataError("plot: series '" + s.name + "' x/y mismatch");
    if (s.x.size() < 2) throw DataError("plot: series '" + s.name + "' has fewer than 2 points");
  }
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotLabels& labels) {
  validate(series);
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo)) throw DataError("plot: no finite points");
  xr.pad();
  yr.pad();
  const double xs = nice_step(xr.hi - xr.lo), ys = nice_step(yr.hi - yr.lo);
  const double x0 = std::floor(xr.lo / xs) * xs, x1 = std::ceil(xr.hi / xs) * xs;
  const double y0 = std::floor(yr.lo / ys) * ys, y1 = std::ceil(yr.hi / ys) * ys;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return kTop + ph - (v - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o.precision(6);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" "
    << "font-size=\"11\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(labels.title) << "</text>\n"
    << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << kLeft << "\" y=\"" << kTop
    << "\" width=\"" << pw << "\" height=\"" << ph << "\"/></g>\n";

  o << "<g class=\"ticks\">\n";
  for (double v = x0; v <= x1 + 1e-9 * xs; v += xs) {
    o << "<line x1=\"" << px(v) << "\" y1=\"" << kTop + ph << "\" x2=\"" << px(v) << "\" y2=\""
      << kTop + ph + 5 << "\" stroke=\"black\"/><text x=\"" << px(v) << "\" y=\""
      << kTop + ph + 18 << "\" text-anchor=\"middle\">" << tick_label(v, xs) << "</text>\n";
  }
  for (double v = y0; v <= y1 + 1e-9 * ys; v += ys) {
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(v) << "\" x2=\"" << kLeft << "\" y2=\""
      << py(v) << "\" stroke=\"black\"/><text x=\"" << kLeft - 8 << "\" y=\"" << py(v) + 4
      << "\" text-anchor=\"end\">" << tick_label(v, ys) << "</text>\n";
  }
  o << "</g>\n"
    << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
    << "\" text-anchor=\"middle\">" << escape(labels.x_label) << "</text>\n"
    << "<text transform=\"translate(18," << kTop + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(labels.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kColours[k % kColours.size()];
    if (s.style == PlotStyle::Line) {
      o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      }
      o << "\"/>\n";
    } else {
      o << "<g fill=\"" << colour << "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2.5\"/>\n";
      }
      o << "</g>\n";
    }
    const double ly = kTop + 12 + 18 * static_cast<double>(k);
    const double lx = kLeft + pw + 12;
    if (s.style == PlotStyle::Line) {
      o << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 20 << "\" y2=\"" << ly
        << "\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>";
    } else {
      o << "<circle cx=\"" << lx + 10 << "\" cy=\"" << ly << "\" r=\"3\" fill=\"" << colour
        << "\"/>";
    }
    o << "<text x=\"" << lx + 26 << "\" y=\"" << ly + 4 << "\">" << escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string emit_plot(const std::vector<PlotSeries>& series, const PlotLabels& labels,
                      const std::string& svg_path) {
  const std::string svg = render_svg(series, labels);
  std::ofstream out(svg_path);
  if (!out) throw DataError("cannot write '" + svg_path + "'");
  out << svg;
  const std::string csv_path = std::filesystem::path(svg_path).replace_extension(".csv").string();
  std::ofstream data(csv_path);
  if (!data) throw DataError("cannot write '" + csv_path + "'");
  data << "series,x,y\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      data << s.name << ',' << csv::format_double(s.x[i]) << ',' << csv::format_double(s.y[i])
           << '\n';
    }
  }
  return csv_path;
}

}  // namespace citedyn
