#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qnforce {

// Minimal log-log line plot, presentation only: no numeric contract.
struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
};

void write_loglog_svg(std::ostream& os, const SvgPlot& plot);

}  // namespace qnforce
