#pragma once

#include <string>
#include <vector>

namespace softq::svg {

/// One plotted series.  When y_err is nonempty it must match y and an
/// error band [y - y_err, y + y_err] is shaded behind the line.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_err;
  std::string color = "#1f77b4";
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 480;
  std::vector<Series> series;
};

/// Renders a self-contained SVG document (no external assets).  Points
/// that cannot be shown on a log axis (non-positive coordinates) are
/// dropped from that series.
std::string render_line_chart(const ChartSpec& spec);

}  // namespace softq::svg
