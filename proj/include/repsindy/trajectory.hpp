#ifndef REPSINDY_TRAJECTORY_HPP_
#define REPSINDY_TRAJECTORY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>

#include <Eigen/Dense>

#include "repsindy/errors.hpp"
#include "repsindy/game_models.hpp"

namespace repsindy {

struct TrajectoryMeta {
  std::string game;
  std::uint64_t seed = 0;
  double h = 0.0;
  double noise_sigma = 0.0;
  ConstraintBlocks blocks;  // per-population state index groups
};

/// Uniformly sampled time series. Row i of `states` is x(times[i]).
struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;
  std::optional<Eigen::MatrixXd> derivatives;
  TrajectoryMeta meta;

  Eigen::Index samples() const { return states.rows(); }
  Eigen::Index dimension() const { return states.cols(); }
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

using Rhs = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Number of samples on [0, t_end] with spacing h, endpoints included. The
/// small slack absorbs t_end / h landing just below an integer.
inline Eigen::Index sample_count(double t_end, double h) {
  return static_cast<Eigen::Index>(std::floor(t_end / h + 1e-9)) + 1;
}

/// One step of the classical fourth-order Runge-Kutta scheme.
inline Eigen::VectorXd rk4_step(const Rhs& rhs, const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) throw NumericalError("rk4 step size must be positive");
  auto eval = [&](const Eigen::VectorXd& at) {
    Eigen::VectorXd v = rhs(at);
    if (v.size() != x.size()) throw DimensionError("rhs changed the state dimension");
    if (!v.allFinite()) throw NumericalError("rhs returned a non-finite value");
    return v;
  };
  const Eigen::VectorXd k1 = eval(x);
  const Eigen::VectorXd k2 = eval(x + 0.5 * h * k1);
  const Eigen::VectorXd k3 = eval(x + 0.5 * h * k2);
  const Eigen::VectorXd k4 = eval(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

using InitialState = std::variant<SimplexPoint, BipopulationState>;

inline Trajectory simulate(const PayoffGame& game, const InitialState& x0,
                           double t_end, double h) {
  if (!(h > 0.0) || !(t_end > 0.0))
    throw NumericalError("t_end and h must be positive");
  if (h > t_end) throw NumericalError("step h must not exceed t_end");

  Eigen::VectorXd z;
  if (const auto* p = std::get_if<SimplexPoint>(&x0)) {
    if (!game.symmetric())
      throw DimensionError("two-population game needs a bipopulation initial state");
    z = p->vector();
  } else {
    if (game.symmetric())
      throw DimensionError("symmetric game needs a single simplex initial state");
    const auto& s = std::get<BipopulationState>(x0);
    if (s.x.size() != game.row_strategies() || s.y.size() != game.col_strategies())
      throw DimensionError("bipopulation state does not match game dimensions");
    z = s.Concatenated();
  }
  if (z.size() != game.state_dimension())
    throw DimensionError("initial state dimension does not match game");

  const Eigen::Index m = sample_count(t_end, h);
  Trajectory traj;
  traj.times.resize(m);
  traj.states.resize(m, z.size());
  traj.meta.game = game.name;
  traj.meta.h = h;
  traj.meta.blocks = game.blocks();

  const Rhs rhs = [&game](const Eigen::VectorXd& s) { return flat_rhs(game, s); };
  for (Eigen::Index i = 0; i < m; ++i) {
    traj.times(i) = static_cast<double>(i) * h;
    if (i > 0) {
      z = rk4_step(rhs, z, h);
      if ((z.array() < -1e-6).any() || (z.array() > 1.0 + 1e-6).any())
        throw NumericalError("state left the simplex at t=" +
                             std::to_string(traj.times(i)) +
                             "; use a smaller step h");
    }
    traj.states.row(i) = z.transpose();
  }
  return traj;
}

inline Trajectory exact_derivatives(const PayoffGame& game, Trajectory traj) {
  if (traj.dimension() != game.state_dimension())
    throw DimensionError("trajectory dimension does not match game");
  Eigen::MatrixXd d(traj.samples(), traj.dimension());
  for (Eigen::Index i = 0; i < traj.samples(); ++i)
    d.row(i) = flat_rhs(game, traj.states.row(i).transpose()).transpose();
  traj.derivatives = std::move(d);
  return traj;
}

/// Spacing of a uniformly sampled trajectory; throws if the grid is not uniform.
inline double uniform_step(const Eigen::VectorXd& times) {
  if (times.size() < 2) throw TooShort("need at least two samples");
  const double h = (times(times.size() - 1) - times(0)) /
                   static_cast<double>(times.size() - 1);
  if (!(h > 0.0)) throw InvalidState("times must be strictly increasing");
  const double tol = 1e-12 * std::max(1.0, std::abs(times(times.size() - 1)));
  for (Eigen::Index i = 1; i < times.size(); ++i)
    if (std::abs(times(i) - times(i - 1) - h) > tol)
      throw InvalidState("times are not uniformly spaced");
  return h;
}

/// Second-order differences: central in the interior, one-sided at the ends.
inline Trajectory finite_difference_derivatives(Trajectory traj) {
  const Eigen::Index m = traj.samples();
  if (m < 3) throw TooShort("finite differences need at least 3 samples");
  const double h = uniform_step(traj.times);
  const Eigen::MatrixXd& x = traj.states;
  Eigen::MatrixXd d(m, x.cols());
  d.middleRows(1, m - 2) = (x.bottomRows(m - 2) - x.topRows(m - 2)) / (2.0 * h);
  d.row(0) = (-3.0 * x.row(0) + 4.0 * x.row(1) - x.row(2)) / (2.0 * h);
  d.row(m - 1) = (3.0 * x.row(m - 1) - 4.0 * x.row(m - 2) + x.row(m - 3)) / (2.0 * h);
  traj.derivatives = std::move(d);
  return traj;
}

/// Uniform draw from the simplex: normalised unit-rate exponentials.
inline SimplexPoint sample_simplex(int n, std::uint64_t seed) {
  if (n < 2) throw DimensionError("simplex sampling needs n >= 2");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> exp1(1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = exp1(rng);
  v /= v.sum();
  // Renormalisation can leave the sum one ulp away from 1.
  v(n - 1) = std::max(0.0, 1.0 - (v.sum() - v(n - 1)));
  return SimplexPoint(v);
}

inline Trajectory add_noise(Trajectory traj, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  traj.meta.noise_sigma = spec.sigma;
  if (spec.sigma == 0.0) return traj;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.sigma);
  for (Eigen::Index i = 0; i < traj.states.rows(); ++i)
    for (Eigen::Index j = 0; j < traj.states.cols(); ++j) traj.states(i, j) += normal(rng);
  if (traj.derivatives) {
    Eigen::MatrixXd& d = *traj.derivatives;
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      for (Eigen::Index j = 0; j < d.cols(); ++j) d(i, j) += normal(rng);
  }
  return traj;
}

/// Planar position of a 3-strategy mix in the triangle with vertices
/// (0,0), (1,0), (1/2, sqrt(3)/2).
inline std::pair<double, double> to_barycentric(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != 3) throw DimensionError("barycentric map needs exactly 3 components");
  constexpr double kHeight = 0.86602540378443864676;  // sqrt(3)/2
  return {x(1) + 0.5 * x(2), kHeight * x(2)};
}

inline std::pair<double, double> to_barycentric(const SimplexPoint& x) {
  return to_barycentric(x.vector());
}

}  // namespace repsindy

#endif  // REPSINDY_TRAJECTORY_HPP_
