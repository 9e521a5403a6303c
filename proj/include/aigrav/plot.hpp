#ifndef AIGRAV_PLOT_HPP
#define AIGRAV_PLOT_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

namespace aigrav {

enum class AxisScale { Linear, Log };

struct PlotSeries {
  std::string label;
  Eigen::ArrayXd x;
  Eigen::ArrayXd y;
  bool dashed = false;
  bool points = false;  // draw markers instead of a line
};

struct PlotSpec {
  std::string title;
  std::string x_label;  // include the unit, e.g. "f (Hz)"
  std::string y_label;
  AxisScale x_scale = AxisScale::Linear;
  AxisScale y_scale = AxisScale::Linear;
  std::vector<double> x_markers;  // thin vertical guides
  std::string timestamp;          // printed in the corner when non-empty
};

// Self-contained SVG. Non-finite points (and non-positive ones on log axes)
// break the line. Throws ValidationError when nothing is drawable.
std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

void write_svg(const std::string& path, const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace aigrav

#endif  // AIGRAV_PLOT_HPP
