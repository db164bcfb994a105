#ifndef REPSINDY_SVG_PLOT_HPP_
#define REPSINDY_SVG_PLOT_HPP_

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "repsindy/errors.hpp"
#include "repsindy/io.hpp"
#include "repsindy/trajectory.hpp"

namespace repsindy {

struct PlotOptions {
  double size = 480.0;    // canvas width in pixels
  double margin = 40.0;
  std::string stroke = "#1f4e9c";
};

namespace detail {

inline std::string Px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string EscapeXml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Ternary plot of a 3-strategy trajectory. Polyline points are written in
/// triangle coordinates (see to_barycentric) at full precision; a group
/// transform maps them to pixels. Nothing is clipped.
inline std::string render_simplex_svg(const Eigen::MatrixXd& states,
                                      const std::array<std::string, 3>& labels,
                                      const PlotOptions& opts = {}) {
  if (states.cols() != 3)
    throw DimensionError("simplex plot needs exactly 3 states, got " +
                         std::to_string(states.cols()));
  if (states.rows() == 0) throw TooShort("trajectory has no samples");
  constexpr double kHeight = 0.86602540378443864676;
  const double scale = opts.size - 2.0 * opts.margin;
  const double width = opts.size;
  const double height = scale * kHeight + 2.0 * opts.margin;
  const double ox = opts.margin, oy = height - opts.margin;
  auto px = [&](double u, double v) {
    return std::pair{ox + scale * u, oy - scale * v};
  };

  std::string points;
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    const auto [u, v] = to_barycentric(Eigen::VectorXd(states.row(i).transpose()));
    if (i > 0) points += ' ';
    points += format_double(u) + ',' + format_double(v);
  }
  const auto [su, sv] = to_barycentric(Eigen::VectorXd(states.row(0).transpose()));

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::Px(width) +
       "\" height=\"" + detail::Px(height) + "\" viewBox=\"0 0 " + detail::Px(width) + ' ' +
       detail::Px(height) + "\">\n";
  s += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "  <g transform=\"translate(" + detail::Px(ox) + ',' + detail::Px(oy) + ") scale(" +
       format_double(scale) + ',' + format_double(-scale) + ")\">\n";
  s += "    <polygon class=\"simplex\" points=\"0,0 1,0 0.5," + format_double(kHeight) +
       "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" "
       "vector-effect=\"non-scaling-stroke\"/>\n";
  s += "    <polyline class=\"trajectory\" points=\"" + points + "\" fill=\"none\" stroke=\"" +
       opts.stroke + "\" stroke-width=\"1.2\" vector-effect=\"non-scaling-stroke\"/>\n";
  s += "  </g>\n";
  const auto [mx, my] = px(su, sv);
  s += "  <circle class=\"start\" cx=\"" + detail::Px(mx) + "\" cy=\"" + detail::Px(my) +
       "\" r=\"3.5\" fill=\"" + opts.stroke + "\"/>\n";
  // Vertex i is where strategy i has share 1.
  const std::array<std::pair<double, double>, 3> corners{{{0.0, 0.0}, {1.0, 0.0}, {0.5, kHeight}}};
  const std::array<std::pair<double, double>, 3> nudge{{{-14.0, 16.0}, {14.0, 16.0}, {0.0, -10.0}}};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto [lx, ly] = px(corners[i].first, corners[i].second);
    s += "  <text class=\"vertex\" x=\"" + detail::Px(lx + nudge[i].first) + "\" y=\"" +
         detail::Px(ly + nudge[i].second) +
         "\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">" +
         detail::EscapeXml(labels[i]) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

/// Triangle-coordinate points of the polyline in an SVG from render_simplex_svg.
inline std::vector<std::pair<double, double>> svg_polyline_points(const std::string& svg) {
  const std::string key = "class=\"trajectory\" points=\"";
  const auto at = svg.find(key);
  if (at == std::string::npos) throw ParseError("svg has no trajectory polyline");
  const auto begin = at + key.size();
  const auto end = svg.find('"', begin);
  std::vector<std::pair<double, double>> out;
  std::size_t i = begin;
  while (i < end) {
    const auto comma = svg.find(',', i);
    auto space = svg.find(' ', comma);
    if (space > end) space = end;
    out.emplace_back(std::stod(svg.substr(i, comma - i)),
                     std::stod(svg.substr(comma + 1, space - comma - 1)));
    i = space + 1;
  }
  return out;
}

}  // namespace repsindy

#endif  // REPSINDY_SVG_PLOT_HPP_
