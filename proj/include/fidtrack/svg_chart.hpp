#pragma once

#include <string>
#include <vector>

namespace fidtrack {

struct ChartSeries {
  std::string label;
  std::string color;  // any SVG color
  std::vector<double> values;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;  // shared abscissa
  std::vector<ChartSeries> series;
  int width = 900;
  int height = 420;
};

/// Standalone SVG document, one <polyline> per series. Output depends only on
/// the input values, so identical charts are byte-identical.
std::string render_svg(const LineChart& chart);

}  // namespace fidtrack
