#include <cmath>

#include "catch_amalgamated.hpp"
#include "repsindy/svg_plot.hpp"

using namespace repsindy;
using Catch::Matchers::WithinAbs;

TEST_CASE("centroid maps to a single point") {
  const Eigen::MatrixXd states = Eigen::MatrixXd::Constant(5, 3, 1.0 / 3.0);
  const std::string svg = render_simplex_svg(states, {"R", "P", "S"});
  const auto pts = svg_polyline_points(svg);
  REQUIRE(pts.size() == 5);
  for (const auto& [u, v] : pts) {
    CHECK_THAT(u, WithinAbs(0.5, 1e-15));
    CHECK_THAT(v, WithinAbs(0.28867513459481287, 1e-15));
  }
  CHECK(svg.find(">R</text>") != std::string::npos);
  CHECK(svg.find(">P</text>") != std::string::npos);
  CHECK(svg.find(">S</text>") != std::string::npos);
  CHECK(svg.find("class=\"simplex\"") != std::string::npos);
}

TEST_CASE("RPS orbit stays in the triangle and closes") {
  const PayoffGame rps = builtin_game("rps");
  const Trajectory t = simulate(rps, SimplexPoint{0.5, 0.3, 0.2}, 200.0, 0.02);
  const auto pts = svg_polyline_points(render_simplex_svg(t.states, {"R", "P", "S"}));
  REQUIRE(pts.size() == static_cast<std::size_t>(t.samples()));
  const double h = std::sqrt(3.0) / 2.0;
  for (const auto& [u, v] : pts) {
    CHECK(v >= -1e-12);
    CHECK(v <= h * 2.0 * u + 1e-12);
    CHECK(v <= h * 2.0 * (1.0 - u) + 1e-12);
  }
  double best = 1e9;
  for (std::size_t i = pts.size() - pts.size() / 10; i < pts.size(); ++i)
    best = std::min(best, std::hypot(pts[i].first - pts[0].first, pts[i].second - pts[0].second));
  CHECK(best < 0.02);
}

TEST_CASE("labels are escaped and noisy points are not clipped") {
  Eigen::MatrixXd states(2, 3);
  states << 1.1, -0.05, -0.05, 0.2, 0.3, 0.5;
  const std::string svg = render_simplex_svg(states, {"a<b", "&", "c"});
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg.find(">&amp;<") != std::string::npos);
  CHECK(svg_polyline_points(svg)[0].second < 0.0);
}

TEST_CASE("only three-strategy trajectories can be plotted") {
  CHECK_THROWS_AS(render_simplex_svg(Eigen::MatrixXd::Constant(4, 2, 0.5), {"a", "b", "c"}),
                  DimensionError);
}
