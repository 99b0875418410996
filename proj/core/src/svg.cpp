#include "qnforce/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace qnforce {

namespace {

constexpr double kWidth = 760, kHeight = 520;
constexpr double kLeft = 80, kRight = 30, kTop = 40, kBottom = 60;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (v > 0 && std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  bool valid() const { return lo < hi; }
};

}  // namespace

void write_loglog_svg(std::ostream& os, const SvgPlot& plot) {
  Range rx, ry;
  for (const auto& s : plot.series) {
    for (double v : s.x) rx.add(v);
    for (double v : s.y) ry.add(v);
  }
  if (!rx.valid() || !ry.valid()) {
    os << "<svg xmlns='http://www.w3.org/2000/svg'/>\n";
    return;
  }
  const double lx0 = std::log10(rx.lo), lx1 = std::log10(rx.hi);
  const double ly0 = std::log10(ry.lo), ly1 = std::log10(ry.hi);
  const auto px = [&](double v) {
    return kLeft + (std::log10(v) - lx0) / (lx1 - lx0) *
                       (kWidth - kLeft - kRight);
  };
  const auto py = [&](double v) {
    return kHeight - kBottom -
           (std::log10(v) - ly0) / (ly1 - ly0) * (kHeight - kTop - kBottom);
  };

  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
     << "' height='" << kHeight << "' font-family='sans-serif'>\n";
  os << "<rect x='" << kLeft << "' y='" << kTop << "' width='"
     << kWidth - kLeft - kRight << "' height='" << kHeight - kTop - kBottom
     << "' fill='none' stroke='black'/>\n";
  os << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle'>"
     << plot.title << "</text>\n";
  os << "<text x='" << kWidth / 2 << "' y='" << kHeight - 16
     << "' text-anchor='middle'>" << plot.x_label << "</text>\n";
  os << "<text x='20' y='" << kHeight / 2
     << "' text-anchor='middle' transform='rotate(-90 20 " << kHeight / 2
     << ")'>" << plot.y_label << "</text>\n";

  // Decade grid lines and labels.
  for (int d = static_cast<int>(std::ceil(lx0));
       d <= static_cast<int>(std::floor(lx1)); ++d) {
    const double x = px(std::pow(10.0, d));
    os << "<line x1='" << x << "' y1='" << kTop << "' x2='" << x << "' y2='"
       << kHeight - kBottom << "' stroke='#ddd'/>\n";
    os << "<text x='" << x << "' y='" << kHeight - kBottom + 18
       << "' text-anchor='middle' font-size='11'>1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(ly0));
       d <= static_cast<int>(std::floor(ly1)); ++d) {
    const double y = py(std::pow(10.0, d));
    os << "<line x1='" << kLeft << "' y1='" << y << "' x2='"
       << kWidth - kRight << "' y2='" << y << "' stroke='#ddd'/>\n";
    os << "<text x='" << kLeft - 6 << "' y='" << y + 4
       << "' text-anchor='end' font-size='11'>1e" << d << "</text>\n";
  }

  double legend_y = kTop + 16;
  for (const auto& s : plot.series) {
    os << "<polyline fill='none' stroke='" << s.color << "'";
    if (s.dashed) os << " stroke-dasharray='6,4'";
    os << " stroke-width='1.5' points='";
    bool pen_up = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.y[i] > 0) || !std::isfinite(s.y[i])) {
        pen_up = true;
        continue;
      }
      (void)pen_up;
      os << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    os << "'/>\n";
    os << "<line x1='" << kWidth - 220 << "' y1='" << legend_y << "' x2='"
       << kWidth - 190 << "' y2='" << legend_y << "' stroke='" << s.color
       << "'";
    if (s.dashed) os << " stroke-dasharray='6,4'";
    os << " stroke-width='1.5'/>\n";
    os << "<text x='" << kWidth - 184 << "' y='" << legend_y + 4
       << "' font-size='12'>" << s.label << "</text>\n";
    legend_y += 18;
  }
  os << "</svg>\n";
}

}  // namespace qnforce
