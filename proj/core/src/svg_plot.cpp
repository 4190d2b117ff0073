#include "drcal/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "drcal/errors.hpp"

namespace drcal {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_svg_line_plot(const std::string& path, const std::string& title,
                         const std::string& x_label,
                         const std::string& y_label,
                         const std::vector<PlotSeries>& series) {
  const double width = 720, height = 440;
  const double ml = 70, mr = 140, mt = 40, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;

  size_t max_n = 0;
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -ymin;
  for (const auto& s : series) {
    max_n = std::max(max_n, s.values.size());
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (max_n == 0 || !std::isfinite(ymin)) {
    ymin = 0;
    ymax = 1;
    max_n = 1;
  }
  if (ymax - ymin < 1e-12) {
    ymax += 1.0;
    ymin -= 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double i) {
    return ml + (max_n > 1 ? (i / double(max_n - 1)) * pw : pw / 2);
  };
  auto py = [&](double v) { return mt + ph - (v - ymin) / (ymax - ymin) * ph; };

  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
    << height << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

  // axes
  f << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
    << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
    << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = ymin + (ymax - ymin) * t / 4.0;
    const double y = py(v);
    f << "<line x1=\"" << ml - 4 << "\" y1=\"" << y << "\" x2=\"" << ml
      << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt(v) << "</text>\n";
    const double xi = (max_n - 1) * t / 4.0;
    const double x = px(xi);
    f << "<line x1=\"" << x << "\" y1=\"" << mt + ph << "\" x2=\"" << x
      << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << x << "\" y=\"" << mt + ph + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">" << fmt(std::round(xi) + 1) << "</text>\n";
  }
  f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"12\">" << x_label << "</text>\n";
  f << "<text x=\"16\" y=\"" << mt + ph / 2
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       "transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << y_label
    << "</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 6];
    f << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < series[s].values.size(); ++i) {
      if (!std::isfinite(series[s].values[i])) continue;
      f << px(double(i)) << "," << py(series[s].values[i]) << " ";
    }
    f << "\"/>\n";
    const double ly = mt + 14 + 18 * s;
    f << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\""
      << ml + pw + 30 << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    f << "<text x=\"" << ml + pw + 36 << "\" y=\"" << ly + 4
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[s].name
      << "</text>\n";
  }
  f << "</svg>\n";
}

}  // namespace drcal
