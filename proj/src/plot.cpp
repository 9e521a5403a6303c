#include "aigrav/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "aigrav/error.hpp"

namespace aigrav {

namespace {

constexpr double kWidth = 820, kHeight = 520;
constexpr double kLeft = 90, kRight = 30, kTop = 50, kBottom = 70;
constexpr double kLogFloor = 1e-14;
constexpr const char* kPalette[] = {"#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad", "#d68910", "#555555"};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  AxisScale scale;
  double lo, hi;     // in data units
  double p0, p1;     // pixel positions of lo and hi

  double map(double v) const {
    const double t = scale == AxisScale::Log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                                             : (v - lo) / (hi - lo);
    return p0 + t * (p1 - p0);
  }
  bool usable(double v) const { return std::isfinite(v) && (scale == AxisScale::Linear || v > 0); }
};

std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.scale == AxisScale::Log) {
    const int d0 = static_cast<int>(std::ceil(std::log10(a.lo) - 1e-9));
    const int d1 = static_cast<int>(std::floor(std::log10(a.hi) + 1e-9));
    const int stride = std::max(1, (d1 - d0 + 1) / 8 + 1);
    if (d1 - d0 >= 2) {
      for (int d = d0; d <= d1; d += stride) out.push_back(std::pow(10.0, d));
      return out;
    }
    // under two decades: label 1, 2 and 5 as well
    for (int d = d0 - 1; d <= d1; ++d)
      for (double m : {1.0, 2.0, 5.0}) {
        const double v = m * std::pow(10.0, d);
        if (v >= a.lo * (1 - 1e-12) && v <= a.hi * (1 + 1e-12)) out.push_back(v);
      }
    return out;
  }
  const double raw = (a.hi - a.lo) / 6;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-9 * step; v += step)
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return out;
}

void range_of(const std::vector<PlotSeries>& series, bool use_x, AxisScale scale, double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (const auto& s : series) {
    const Eigen::ArrayXd& v = use_x ? s.x : s.y;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double xi = s.x[i], yi = s.y[i];
      if (!std::isfinite(xi) || !std::isfinite(yi)) continue;
      if (scale == AxisScale::Log && v[i] <= 0) continue;
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
    }
  }
  if (!(lo <= hi)) throw ValidationError("no finite data to plot", "plot");
  if (scale == AxisScale::Log) {
    // deep notches (exact zeros) would flatten everything else
    lo = std::max(lo, hi * kLogFloor);
    if (hi / lo < 10) {
      lo /= 2;
      hi *= 2;
    } else {
      const double pad = std::pow(hi / lo, 0.03);
      lo /= pad;
      hi *= pad;
    }
  } else if (hi - lo <= 1e-12 * std::max(std::abs(hi), 1e-300)) {
    const double pad = hi == 0 ? 1.0 : 0.1 * std::abs(hi);
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
}

}  // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  if (series.empty()) throw ValidationError("nothing to plot", "plot");
  for (const auto& s : series)
    if (s.x.size() != s.y.size()) throw ValidationError("x and y differ in length", "plot");

  Axis xa{spec.x_scale, 0, 0, kLeft, kWidth - kRight};
  Axis ya{spec.y_scale, 0, 0, kHeight - kBottom, kTop};
  range_of(series, true, spec.x_scale, xa.lo, xa.hi);
  range_of(series, false, spec.y_scale, ya.lo, ya.hi);

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
    << "</text>\n";

  // grid and ticks
  o << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  const auto xt = ticks(xa), yt = ticks(ya);
  for (double v : xt)
    o << "<line x1=\"" << fmt("%.1f", xa.map(v)) << "\" y1=\"" << kTop << "\" x2=\"" << fmt("%.1f", xa.map(v))
      << "\" y2=\"" << kHeight - kBottom << "\"/>\n";
  for (double v : yt)
    o << "<line x1=\"" << kLeft << "\" y1=\"" << fmt("%.1f", ya.map(v)) << "\" x2=\"" << kWidth - kRight
      << "\" y2=\"" << fmt("%.1f", ya.map(v)) << "\"/>\n";
  o << "</g>\n";
  o << "<g text-anchor=\"middle\">\n";
  for (double v : xt)
    o << "<text x=\"" << fmt("%.1f", xa.map(v)) << "\" y=\"" << kHeight - kBottom + 18 << "\">"
      << fmt("%.10g", v) << "</text>\n";
  o << "</g>\n<g text-anchor=\"end\">\n";
  for (double v : yt)
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt("%.1f", ya.map(v) + 4) << "\">" << fmt("%g", v)
      << "</text>\n";
  o << "</g>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
    << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 25
    << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(22 " << (kTop + kHeight - kBottom) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

  for (double m : spec.x_markers) {
    if (!xa.usable(m) || m < xa.lo || m > xa.hi) continue;
    o << "<line x1=\"" << fmt("%.1f", xa.map(m)) << "\" y1=\"" << kTop << "\" x2=\"" << fmt("%.1f", xa.map(m))
      << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"#999999\" stroke-dasharray=\"2 3\"/>\n";
  }

  // Series. Long series are reduced to the min/max per pixel column.
  const double plot_w = kWidth - kLeft - kRight;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    std::vector<std::vector<std::pair<double, double>>> runs(1);
    int column = -1;
    double col_min = 0, col_max = 0;
    auto flush = [&]() {
      if (column < 0) return;
      const double px = kLeft + column + 0.5;
      runs.back().emplace_back(px, col_max);
      if (col_min != col_max) runs.back().emplace_back(px, col_min);
      column = -1;
    };
    const bool decimate = s.x.size() > static_cast<Eigen::Index>(2 * plot_w);
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      if (!xa.usable(s.x[i]) || !ya.usable(s.y[i])) {
        flush();
        if (!runs.back().empty()) runs.emplace_back();
        continue;
      }
      const double px = xa.map(s.x[i]);
      const double py = std::clamp(ya.map(std::max(s.y[i], ya.scale == AxisScale::Log ? ya.lo : s.y[i])), kTop,
                                   kHeight - kBottom);
      if (!decimate) {
        runs.back().emplace_back(px, py);
        continue;
      }
      const int c = static_cast<int>(std::floor(px - kLeft));
      if (c != column) {
        flush();
        column = c;
        col_min = col_max = py;
      } else {
        col_min = std::max(col_min, py);  // pixel y grows downward
        col_max = std::min(col_max, py);
      }
    }
    flush();
    for (const auto& run : runs) {
      if (run.empty()) continue;
      if (s.points) {
        for (const auto& [px, py] : run)
          o << "<circle cx=\"" << fmt("%.1f", px) << "\" cy=\"" << fmt("%.1f", py) << "\" r=\"2.5\" fill=\""
            << color << "\"/>\n";
        continue;
      }
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.3\"";
      if (s.dashed) o << " stroke-dasharray=\"6 4\"";
      o << " points=\"";
      for (const auto& [px, py] : run) o << fmt("%.1f", px) << ',' << fmt("%.1f", py) << ' ';
      o << "\"/>\n";
    }
  }

  // legend
  std::size_t labelled = 0;
  for (const auto& s : series) labelled += !s.label.empty();
  if (labelled)
    o << "<rect x=\"" << kWidth - kRight - 198 << "\" y=\"" << kTop + 4 << "\" width=\"192\" height=\""
      << 16 * labelled + 8 << "\" fill=\"white\" fill-opacity=\"0.85\" stroke=\"#cccccc\"/>\n";
  double ly = kTop + 18;
  for (std::size_t si = 0; si < series.size(); ++si) {
    if (series[si].label.empty()) continue;
    const char* color = kPalette[si % std::size(kPalette)];
    if (series[si].points) {
      o << "<circle cx=\"" << kWidth - kRight - 177 << "\" cy=\"" << ly - 4 << "\" r=\"3\" fill=\"" << color
        << "\"/>\n<text";
    } else {
      o << "<line x1=\"" << kWidth - kRight - 190 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kWidth - kRight - 165
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
      if (series[si].dashed) o << " stroke-dasharray=\"6 4\"";
      o << "/>\n<text";
    }
    o << " x=\"" << kWidth - kRight - 160 << "\" y=\"" << ly << "\">" << escape(series[si].label)
      << "</text>\n";
    ly += 16;
  }
  if (!spec.timestamp.empty())
    o << "<text x=\"" << kWidth - 6 << "\" y=\"" << kHeight - 6
      << "\" text-anchor=\"end\" font-size=\"9\" fill=\"#888888\">" << escape(spec.timestamp) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::string& path, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  const std::string text = render_svg(spec, series);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path, "out");
  out << text;
}

}  // namespace aigrav
