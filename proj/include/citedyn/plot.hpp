#pragma once

#include <string>
#include <vector>

namespace citedyn {

enum class PlotStyle { Line, Scatter };

struct PlotSeries {
  std::string name;
  PlotStyle style = PlotStyle::Line;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotLabels {
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Writes a standalone SVG (one polyline per line series, one circle per
/// scatter point) and the plotted data as `<out without extension>.csv` with
/// columns series,x,y. Returns the CSV path. Throws DataError unless there is
/// at least one series and every series has >= 2 points.
std::string emit_plot(const std::vector<PlotSeries>& series, const PlotLabels& labels,
                      const std::string& svg_path);

/// SVG document only, for callers that manage files themselves.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotLabels& labels);

}  // namespace citedyn
