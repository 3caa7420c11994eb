#pragma once

#include <string>
#include <vector>

namespace dudemec {

/// One plotted line: points (x[i], y[i]) in data coordinates.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line chart (axes, ticks, legend, one polyline with
/// markers per series). Deterministic output for identical input.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series);

}  // namespace dudemec
