#include "fidtrack/svg_chart.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "fidtrack/errors.hpp"

namespace fidtrack {

namespace {

std::string fixed(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const LineChart& chart) {
  if (chart.x.empty()) throw InvalidArgument("chart needs at least one sample");
  for (const auto& s : chart.series) {
    if (s.values.size() != chart.x.size()) throw InvalidArgument("series '" + s.label + "' length mismatch");
  }

  const double left = 80, right = 160, top = 40, bottom = 50;
  const double plot_w = chart.width - left - right;
  const double plot_h = chart.height - top - bottom;

  double x_min = *std::min_element(chart.x.begin(), chart.x.end());
  double x_max = *std::max_element(chart.x.begin(), chart.x.end());
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -y_min;
  for (const auto& s : chart.series) {
    for (double v : s.values) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (chart.series.empty()) y_min = 0.0, y_max = 1.0;
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  const auto py = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(chart.width) + "\" height=\"" +
         std::to_string(chart.height) + "\" viewBox=\"0 0 " + std::to_string(chart.width) + " " +
         std::to_string(chart.height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(chart.width) + "\" height=\"" +
         std::to_string(chart.height) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fixed(left) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" +
         escape(chart.title) + "</text>\n";
  svg += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(plot_w) + "\" height=\"" +
         fixed(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";

  // Axis extents.
  const auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    svg += "<text x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"" +
           anchor + "\">" + escape(text) + "</text>\n";
  };
  label(left, top + plot_h + 18, fixed(x_min, 0), "start");
  label(left + plot_w, top + plot_h + 18, fixed(x_max, 0), "end");
  label(left + plot_w / 2, top + plot_h + 38, chart.x_label, "middle");
  label(left - 6, top + 12, fixed(y_max, 3), "end");
  label(left - 6, top + plot_h, fixed(y_min, 3), "end");
  label(left - 6, top + plot_h / 2, chart.y_label, "end");

  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    svg += "<polyline fill=\"none\" stroke=\"" + escape(s.color) + "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t j = 0; j < s.values.size(); ++j) {
      if (j) svg += ' ';
      svg += fixed(px(chart.x[j])) + "," + fixed(py(s.values[j]));
    }
    svg += "\"/>\n";
    const double ly = top + 16 + 18 * static_cast<double>(i);
    svg += "<line x1=\"" + fixed(left + plot_w + 12) + "\" y1=\"" + fixed(ly - 4) + "\" x2=\"" +
           fixed(left + plot_w + 36) + "\" y2=\"" + fixed(ly - 4) + "\" stroke=\"" + escape(s.color) +
           "\" stroke-width=\"2\"/>\n";
    label(left + plot_w + 42, ly, s.label, "start");
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace fidtrack
