#include "morpho/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "morpho/errors.hpp"

namespace morpho {

namespace {

constexpr double kWidth = 640.0, kHeight = 360.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

// Roughly five round-numbered ticks covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
    out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
  }
  return out;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const LinePlot& plot) {
  if (plot.x.size() != plot.y.size()) throw ParseError("plot series length mismatch");
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (!plot.x.empty()) {
    const auto [xmin, xmax] = std::minmax_element(plot.x.begin(), plot.x.end());
    const auto [ymin, ymax] = std::minmax_element(plot.y.begin(), plot.y.end());
    x_lo = *xmin;
    x_hi = *xmax;
    y_lo = *ymin;
    y_hi = *ymax;
  }
  if (x_hi - x_lo < 1e-12) x_hi = x_lo + 1.0;
  if (y_hi - y_lo < 1e-9) {
    y_lo -= 0.5;
    y_hi += 0.5;
  } else {
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto sx = [&](double v) { return kLeft + (v - x_lo) / (x_hi - x_lo) * pw; };
  const auto sy = [&](double v) { return kTop + (y_hi - v) / (y_hi - y_lo) * ph; };

  std::string svg;
  auto out = std::back_inserter(svg);
  fmt::format_to(out,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
                 "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n",
                 kWidth, kHeight);
  fmt::format_to(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  fmt::format_to(out, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                 kWidth / 2, escape(plot.title));

  for (double v : ticks(y_lo, y_hi)) {
    fmt::format_to(out,
                   "<line x1=\"{0:.1f}\" x2=\"{1:.1f}\" y1=\"{2:.1f}\" y2=\"{2:.1f}\" "
                   "stroke=\"#ddd\"/>\n<text x=\"{3:.1f}\" y=\"{4:.1f}\" "
                   "text-anchor=\"end\">{5:g}</text>\n",
                   kLeft, kLeft + pw, sy(v), kLeft - 6, sy(v) + 4, v);
  }
  for (double v : ticks(x_lo, x_hi)) {
    fmt::format_to(out,
                   "<line x1=\"{0:.1f}\" x2=\"{0:.1f}\" y1=\"{1:.1f}\" y2=\"{2:.1f}\" "
                   "stroke=\"#ddd\"/>\n<text x=\"{0:.1f}\" y=\"{3:.1f}\" "
                   "text-anchor=\"middle\">{4:g}</text>\n",
                   sx(v), kTop, kTop + ph, kTop + ph + 16, v);
  }
  fmt::format_to(out,
                 "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
                 "stroke=\"black\"/>\n",
                 kLeft, kTop, pw, ph);
  fmt::format_to(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                 kLeft + pw / 2, kHeight - 10, escape(plot.x_label));
  fmt::format_to(out,
                 "<text transform=\"translate(18 {}) rotate(-90)\" "
                 "text-anchor=\"middle\">{}</text>\n",
                 kTop + ph / 2, escape(plot.y_label));

  if (!plot.x.empty()) {
    svg += "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < plot.x.size(); ++i) {
      fmt::format_to(out, "{}{:.2f},{:.2f}", i ? " " : "", sx(plot.x[i]), sy(plot.y[i]));
    }
    svg += "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> write_channel_plots(const CsvTable& csv,
                                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& t = csv.column("t");
  std::vector<double> phi_deg = csv.column("phi");
  for (double& v : phi_deg) v *= 180.0 / std::numbers::pi;
  std::vector<double> ubar(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    ubar[i] = 0.25 * (csv.column("u1")[i] + csv.column("u2")[i] + csv.column("u3")[i] +
                      csv.column("u4")[i]);
  }
  const std::vector<std::pair<std::string, LinePlot>> plots = {
      {"z.svg", {"Altitude", "t [s]", "z [m]", t, csv.column("z")}},
      {"phi.svg", {"Tilt angle", "t [s]", "phi [deg]", t, phi_deg}},
      {"alpha.svg", {"Blending factor", "t [s]", "alpha", t, csv.column("alpha")}},
      {"ubar.svg", {"Mean normalized thrust", "t [s]", "u_bar", t, ubar}},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, plot] : plots) {
    write_file_atomic(dir / name, render_svg(plot));
    written.push_back(dir / name);
  }
  return written;
}

}  // namespace morpho
