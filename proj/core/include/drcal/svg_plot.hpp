#pragma once

#include <string>
#include <vector>

namespace drcal {

struct PlotSeries {
  std::string name;
  std::vector<double> values;  // plotted against 1..n
};

/// Writes a static SVG line plot (fixed 720x440 canvas, axes, legend).
void write_svg_line_plot(const std::string& path, const std::string& title,
                         const std::string& x_label,
                         const std::string& y_label,
                         const std::vector<PlotSeries>& series);

}  // namespace drcal
