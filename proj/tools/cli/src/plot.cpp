#include "ringloc_cli/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace ringloc::cli {

namespace {

constexpr double kPanel = 320.0;
constexpr double kMargin = 40.0;

std::ostringstream number_stream() {
  std::ostringstream os;
  os << std::setprecision(10);
  return os;
}

// Maps [lo, hi] onto [a, b].
double lerp(double x, double lo, double hi, double a, double b) {
  return hi > lo ? a + (x - lo) / (hi - lo) * (b - a) : 0.5 * (a + b);
}

void panel(std::ostringstream& os, double x0, const eval::RepeatabilityReport& r, int axis_b, const char* label_b,
           double half) {
  const double left = x0 + kMargin;
  const double top = kMargin;
  const double size = kPanel - 2 * kMargin;
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << size << "\" height=\"" << size
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + size / 2 << "\" x2=\"" << left + size << "\" y2=\""
     << top + size / 2 << "\" stroke=\"#ddd\"/>\n";
  os << "<line x1=\"" << left + size / 2 << "\" y1=\"" << top << "\" x2=\"" << left + size / 2 << "\" y2=\""
     << top + size << "\" stroke=\"#ddd\"/>\n";
  os << "<text x=\"" << left + size / 2 << "\" y=\"" << top + size + 25 << "\" text-anchor=\"middle\">dx [mm]</text>\n";
  os << "<text x=\"" << x0 + 12 << "\" y=\"" << top + size / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
     << x0 + 12 << ' ' << top + size / 2 << ")\">" << label_b << " [mm]</text>\n";
  for (const auto& c : r.centers) {
    const double px = lerp(c.x() - r.mean.x(), -half, half, left, left + size);
    const double py = lerp(c[axis_b] - r.mean[axis_b], -half, half, top + size, top);
    os << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.7\"/>\n";
  }
}

}  // namespace

std::string scatter_csv(const eval::RepeatabilityReport& r) {
  auto os = number_stream();
  os << "id,x,y,z,deviation\n";
  for (std::size_t i = 0; i < r.centers.size(); ++i) {
    const auto& c = r.centers[i];
    os << (i < r.ids.size() ? r.ids[i] : std::to_string(i + 1)) << ',' << c.x() << ',' << c.y() << ',' << c.z() << ','
       << r.deviations[i] << '\n';
  }
  return os.str();
}

std::string scatter_svg(const eval::RepeatabilityReport& r, const std::string& title) {
  double half = 1e-6;
  for (const auto& c : r.centers) half = std::max(half, (c - r.mean).cwiseAbs().maxCoeff());
  half *= 1.1;
  auto os = number_stream();
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * kPanel << "\" height=\"" << kPanel + 20
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << kPanel << "\" y=\"16\" text-anchor=\"middle\">" << title << " (n=" << r.successes()
     << ", failures=" << r.n_failures << ", half-range " << half << " mm)</text>\n";
  panel(os, 0.0, r, 1, "dy", half);
  panel(os, kPanel, r, 2, "dz", half);
  os << "</svg>\n";
  return os.str();
}

std::string trend_csv(std::span<const TrendPoint> points, const std::string& axis) {
  auto os = number_stream();
  os << axis << ",runs,failures,std_x,std_y,std_z,mean_deviation\n";
  for (const auto& p : points) {
    const auto& r = p.report;
    os << p.value << ',' << r.n_runs << ',' << r.n_failures << ',' << r.std_dev.x() << ',' << r.std_dev.y() << ','
       << r.std_dev.z() << ',' << r.mean_deviation << '\n';
  }
  return os.str();
}

std::string trend_svg(std::span<const TrendPoint> points, const std::string& axis) {
  const double width = 2 * kPanel;
  const double height = kPanel;
  const double left = 60.0, right = width - 110.0, top = 30.0, bottom = height - 40.0;
  double vmin = 0.0, vmax = 0.0, ymax = 1e-9;
  if (!points.empty()) {
    vmin = vmax = points.front().value;
    for (const auto& p : points) {
      vmin = std::min(vmin, p.value);
      vmax = std::max(vmax, p.value);
      ymax = std::max({ymax, p.report.mean_deviation, p.report.std_dev.maxCoeff()});
    }
  }
  ymax *= 1.1;
  struct Series {
    const char* name;
    const char* colour;
    double (*get)(const eval::RepeatabilityReport&);
  };
  const std::array<Series, 4> series{{
      {"mean deviation", "#000000", [](const eval::RepeatabilityReport& r) { return r.mean_deviation; }},
      {"std x", "#d62728", [](const eval::RepeatabilityReport& r) { return r.std_dev.x(); }},
      {"std y", "#2ca02c", [](const eval::RepeatabilityReport& r) { return r.std_dev.y(); }},
      {"std z", "#1f77b4", [](const eval::RepeatabilityReport& r) { return r.std_dev.z(); }},
  }};
  auto os = number_stream();
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\"" << bottom - top
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">" << axis
     << " [" << vmin << " .. " << vmax << "]</text>\n";
  os << "<text x=\"" << left << "\" y=\"20\">0 .. " << ymax << " mm</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    os << "<polyline fill=\"none\" stroke=\"" << series[s].colour << "\" points=\"";
    for (const auto& p : points) {
      os << lerp(p.value, vmin, vmax, left, right) << ',' << lerp(series[s].get(p.report), 0.0, ymax, bottom, top)
         << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << right + 10 << "\" y=\"" << top + 15 * (s + 1) << "\" fill=\"" << series[s].colour << "\">"
       << series[s].name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ringloc::cli
