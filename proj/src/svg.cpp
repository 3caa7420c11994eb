#include "dudemec/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace dudemec {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  double span() const { return hi - lo; }
};

Range data_range(const std::vector<Series>& series, bool use_x) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double v : use_x ? s.x : s.y) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) return {0.0, 1.0};
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - (use_x ? 0.0 : pad), hi + pad};
}

/// Round tick step: 1/2/5 times a power of ten covering span/target ticks.
double nice_step(double span, int target) {
  const double raw = span / std::max(target, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) return mag * mult;
  }
  return mag * 10.0;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series) {
  constexpr double width = 720, height = 480;
  constexpr double ml = 78, mr = 24, mt = 46, mb = 58;
  const double plot_w = width - ml - mr;
  const double plot_h = height - mt - mb;

  const Range xr = data_range(series, true);
  const Range yr = data_range(series, false);
  const auto sx = [&](double v) { return ml + (v - xr.lo) / xr.span() * plot_w; };
  const auto sy = [&](double v) { return mt + plot_h - (v - yr.lo) / yr.span() * plot_h; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b"};
  constexpr int n_colors = 6;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << ' ' << height
      << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << escape(title) << "</text>\n";

  // axes
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n";

  const double x_step = nice_step(xr.span(), 6);
  for (double t = std::ceil(xr.lo / x_step) * x_step; t <= xr.hi + 1e-9 * xr.span();
       t += x_step) {
    const double px = sx(t);
    svg << "<line x1=\"" << fmt(px) << "\" y1=\"" << mt + plot_h << "\" x2=\"" << fmt(px)
        << "\" y2=\"" << mt + plot_h + 5 << "\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << fmt(px) << "\" y=\"" << mt + plot_h + 20
        << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  const double y_step = nice_step(yr.span(), 6);
  for (double t = std::ceil(yr.lo / y_step) * y_step; t <= yr.hi + 1e-9 * yr.span();
       t += y_step) {
    const double py = sy(t);
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt(py) << "\" x2=\"" << ml << "\" y2=\""
        << fmt(py) << "\" stroke=\"#444\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << fmt(py) << "\" x2=\"" << ml + plot_w
        << "\" y2=\"" << fmt(py) << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << ml - 9 << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  svg << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 14
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  svg << "<text x=\"20\" y=\"" << mt + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << mt + plot_h / 2 << ")\">"
      << escape(y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = palette[i % n_colors];
    const Series& s = series[i];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t p = 0; p < s.x.size(); ++p) {
      if (p) svg << ' ';
      svg << fmt(sx(s.x[p])) << ',' << fmt(sy(s.y[p]));
    }
    svg << "\"/>\n";
    for (std::size_t p = 0; p < s.x.size(); ++p) {
      svg << "<circle cx=\"" << fmt(sx(s.x[p])) << "\" cy=\"" << fmt(sy(s.y[p]))
          << "\" r=\"3.4\" fill=\"" << color << "\"/>\n";
    }
    // legend entry
    const double ly = mt + 14 + 18 * static_cast<double>(i);
    svg << "<line x1=\"" << ml + plot_w - 150 << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << ml + plot_w - 124 << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << ml + plot_w - 118 << "\" y=\"" << fmt(ly + 4) << "\">"
        << escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace dudemec
