#ifndef REPSINDY_EVALUATION_HPP_
#define REPSINDY_EVALUATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "repsindy/errors.hpp"
#include "repsindy/game_models.hpp"
#include "repsindy/sparse_model.hpp"
#include "repsindy/trajectory.hpp"

namespace repsindy {

struct SupportMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct CoefficientError {
  double max_abs = 0.0;
  double rms = 0.0;
};

namespace detail {

inline void RequireSameLibrary(const SparseModel& a, const SparseModel& b) {
  if (!(a.library == b.library) || a.coefficients.rows() != b.coefficients.rows() ||
      a.coefficients.cols() != b.coefficients.cols())
    throw LibraryMismatch("models use different libraries");
}

}  // namespace detail

/// Entrywise comparison of nonzero patterns. Nonzero means exactly nonzero.
inline SupportMetrics support_metrics(const SparseModel& identified, const SparseModel& truth) {
  detail::RequireSameLibrary(identified, truth);
  const auto id = (identified.coefficients.array() != 0.0);
  const auto tr = (truth.coefficients.array() != 0.0);
  const double tp = static_cast<double>((id && tr).count());
  const double n_id = static_cast<double>(id.count());
  const double n_tr = static_cast<double>(tr.count());
  SupportMetrics s;
  if (n_id == 0 && n_tr == 0) return {1.0, 1.0, 1.0};
  s.precision = n_id > 0 ? tp / n_id : 0.0;
  s.recall = n_tr > 0 ? tp / n_tr : 0.0;
  s.f1 = (s.precision + s.recall) > 0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

/// Errors over the union of both supports.
inline CoefficientError coefficient_error(const SparseModel& identified,
                                          const SparseModel& truth) {
  detail::RequireSameLibrary(identified, truth);
  CoefficientError e;
  double sq = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index r = 0; r < truth.coefficients.rows(); ++r)
    for (Eigen::Index c = 0; c < truth.coefficients.cols(); ++c) {
      const double a = identified.coefficients(r, c), b = truth.coefficients(r, c);
      if (a == 0.0 && b == 0.0) continue;
      const double d = std::abs(a - b);
      e.max_abs = std::max(e.max_abs, d);
      sq += d * d;
      ++count;
    }
  e.rms = count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
  return e;
}

struct ForecastResult {
  double rmse = 0.0;  // over the samples before divergence, if any
  std::optional<double> diverged_at;
};

/// Rolls out the identified model and the true replicator dynamics from the
/// same start with identical RK4 settings and compares them sample by sample.
inline ForecastResult forecast(const SparseModel& model, const PayoffGame& game,
                               const InitialState& x0, double t_end, double h) {
  const Trajectory truth = simulate(game, x0, t_end, h);
  if (model.n_states() != truth.dimension())
    throw DimensionError("model dimension does not match game");
  const Rhs rhs = [&model](const Eigen::VectorXd& z) { return predict(model, z); };
  Eigen::VectorXd z = truth.states.row(0).transpose();
  ForecastResult out;
  double sq = 0.0;
  Eigen::Index used = 0;
  for (Eigen::Index i = 0; i < truth.samples(); ++i) {
    if (i > 0) {
      bool bad = false;
      try {
        z = rk4_step(rhs, z, h);
      } catch (const NumericalError&) {
        bad = true;
      }
      if (bad || !z.allFinite() || z.cwiseAbs().maxCoeff() > 10.0) {
        out.diverged_at = truth.times(i);
        break;
      }
    }
    sq += (z - truth.states.row(i).transpose()).squaredNorm();
    used += z.size();
  }
  out.rmse = used > 0 ? std::sqrt(sq / static_cast<double>(used)) : 0.0;
  return out;
}

inline double forecast_error(const SparseModel& model, const PayoffGame& game,
                             const InitialState& x0, double t_end, double h) {
  const ForecastResult r = forecast(model, game, x0, t_end, h);
  if (r.diverged_at) throw Diverged(*r.diverged_at);
  return r.rmse;
}

/// One line per state: "dx_R/dt = -1.00000*x_R*x_P + 1.00000*x_R*x_S".
inline std::vector<std::string> render_equations(const SparseModel& model,
                                                 const std::vector<std::string>& names) {
  if (static_cast<int>(names.size()) != model.n_states())
    throw DimensionError("need one name per state");
  std::vector<std::string> lines;
  for (int c = 0; c < model.n_states(); ++c) {
    std::string rhs;
    for (int r = 0; r < model.library.size(); ++r) {
      const double v = model.coefficients(r, c);
      if (v == 0.0) continue;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%#.6g", rhs.empty() ? v : std::abs(v));
      if (!rhs.empty()) rhs += v < 0 ? " - " : " + ";
      rhs += buf;
      const std::string term = model.library.FeatureName(r, names);
      if (term != "1") rhs += "*" + term;
    }
    lines.push_back("d" + names[static_cast<std::size_t>(c)] + "/dt = " +
                    (rhs.empty() ? "0" : rhs));
  }
  return lines;
}

}  // namespace repsindy

#endif  // REPSINDY_EVALUATION_HPP_
