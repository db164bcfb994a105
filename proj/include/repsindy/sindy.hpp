#ifndef REPSINDY_SINDY_HPP_
#define REPSINDY_SINDY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iterator>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "repsindy/errors.hpp"
#include "repsindy/library.hpp"
#include "repsindy/sparse_model.hpp"
#include "repsindy/stlsq.hpp"
#include "repsindy/trajectory.hpp"

namespace repsindy {

/// Stacked states X and derivatives Xdot, trajectory after trajectory.
struct DataMatrices {
  Eigen::MatrixXd x;
  Eigen::MatrixXd xdot;
  std::vector<Eigen::Index> boundaries;  // start row of each trajectory, then total
  double noise_sigma = 0.0;              // largest noise level among the inputs
};

inline DataMatrices assemble_data(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) throw DimensionError("no trajectories to assemble");
  const Eigen::Index n = trajectories.front().dimension();
  Eigen::Index rows = 0;
  for (const auto& t : trajectories) {
    if (t.dimension() != n)
      throw DimensionError("trajectories have different state dimensions");
    if (!t.derivatives) throw MissingDerivatives("trajectory has no derivative matrix");
    if (t.derivatives->rows() != t.samples() || t.derivatives->cols() != n)
      throw DimensionError("derivative matrix shape does not match states");
    rows += t.samples();
  }
  DataMatrices data;
  data.x.resize(rows, n);
  data.xdot.resize(rows, n);
  Eigen::Index at = 0;
  for (const auto& t : trajectories) {
    data.boundaries.push_back(at);
    data.x.middleRows(at, t.samples()) = t.states;
    data.xdot.middleRows(at, t.samples()) = *t.derivatives;
    data.noise_sigma = std::max(data.noise_sigma, t.meta.noise_sigma);
    at += t.samples();
  }
  data.boundaries.push_back(rows);
  return data;
}

struct FitOptions {
  StlsqOptions stlsq;
  std::optional<ConstraintBlocks> constraint_blocks;
};

namespace detail {

inline std::vector<int> FittedColumns(int n, const std::optional<ConstraintBlocks>& blocks) {
  std::vector<bool> skip(static_cast<std::size_t>(n), false);
  if (blocks)
    for (const auto& b : *blocks)
      if (b.size() >= 2) skip[static_cast<std::size_t>(b.back())] = true;
  std::vector<int> cols;
  for (int j = 0; j < n; ++j)
    if (!skip[static_cast<std::size_t>(j)]) cols.push_back(j);
  return cols;
}

inline SparseModel FitTheta(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& xdot,
                            const FeatureLibrary& library, const FitOptions& opts) {
  const int n = library.n_states();
  const std::vector<int> fitted = FittedColumns(n, opts.constraint_blocks);
  Eigen::MatrixXd targets(xdot.rows(), static_cast<Eigen::Index>(fitted.size()));
  for (std::size_t k = 0; k < fitted.size(); ++k)
    targets.col(static_cast<Eigen::Index>(k)) = xdot.col(fitted[k]);

  SparseModel model = SparseModel::Zero(library);
  model.threshold = opts.stlsq.threshold;
  const Eigen::MatrixXd xi = stlsq(theta, targets, opts.stlsq);
  for (std::size_t k = 0; k < fitted.size(); ++k)
    model.coefficients.col(fitted[k]) = xi.col(static_cast<Eigen::Index>(k));
  if (opts.constraint_blocks) {
    model.constraint_blocks = *opts.constraint_blocks;
    model.reconstructed_columns =
        ReconstructBlocks(model.coefficients, model.constraint_blocks, model.threshold);
  }
  return model;
}

/// Runs fn(0..count-1) on a few worker threads. Callers write results by
/// index, so output does not depend on scheduling.
template <typename Fn>
void ParallelFor(int count, Fn&& fn) {
  const int workers = std::max(
      1, std::min(count, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Independent seed for stream `stream` of a master seed.
inline std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace detail

/// SINDy fit. With constraint blocks, only the first b-1 states of each block
/// are regressed; the last one is reconstructed from sum(xdot) = 0.
inline SparseModel fit(const DataMatrices& data, const FeatureLibrary& library,
                       const FitOptions& opts = {}) {
  if (data.x.cols() != library.n_states())
    throw DimensionError("data dimension does not match library");
  if (opts.constraint_blocks) {
    CheckBlocks(*opts.constraint_blocks, library.n_states());
    if (data.noise_sigma == 0.0)
      for (const auto& block : *opts.constraint_blocks)
        for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
          double s = 0.0;
          for (int j : block) s += data.x(i, j);
          if (std::abs(s - 1.0) > 1e-6)
            throw DimensionError("constraint block states do not sum to 1 at row " +
                                 std::to_string(i));
        }
  }
  return detail::FitTheta(library.Evaluate(data.x), data.xdot, library, opts);
}

struct EnsembleOptions {
  int n_models = 100;
  double subsample_fraction = 0.6;
  double inclusion_threshold = 0.5;
  std::uint64_t seed = 0;
};

struct EnsembleModel {
  int member_count = 0;
  double subsample_fraction = 1.0;
  double inclusion_threshold = 0.5;
  Eigen::MatrixXd coefficient_median;
  Eigen::MatrixXd inclusion_probability;
  // Median model with reconstructed columns re-derived from the median fitted
  // columns, so the block column-sum identity holds.
  SparseModel model;
};

/// Bagged SINDy: fits on row subsamples drawn without replacement, then
/// aggregates by coefficient median and per-entry inclusion probability.
inline EnsembleModel ensemble_fit(const DataMatrices& data, const FeatureLibrary& library,
                                  const FitOptions& opts, const EnsembleOptions& ens) {
  if (ens.n_models < 1) throw ConfigError("ensemble needs n_models >= 1");
  if (!(ens.subsample_fraction > 0.0 && ens.subsample_fraction <= 1.0))
    throw ConfigError("subsample_fraction must lie in (0, 1]");
  if (!(ens.inclusion_threshold >= 0.0 && ens.inclusion_threshold <= 1.0))
    throw ConfigError("inclusion_threshold must lie in [0, 1]");
  const Eigen::Index m = data.x.rows();
  const auto rows = static_cast<Eigen::Index>(
      std::llround(ens.subsample_fraction * static_cast<double>(m)));
  if (rows < 1) throw ConfigError("subsample contains no rows");

  // Validates blocks and the sum-to-one precondition once on the full data.
  const SparseModel plain = fit(data, library, opts);
  const Eigen::MatrixXd theta = library.Evaluate(data.x);

  std::vector<Eigen::MatrixXd> members(static_cast<std::size_t>(ens.n_models));
  detail::ParallelFor(ens.n_models, [&](int k) {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(m));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    std::vector<Eigen::Index> pick;
    pick.reserve(static_cast<std::size_t>(rows));
    std::mt19937_64 rng(detail::DeriveSeed(ens.seed, static_cast<std::uint64_t>(k)));
    std::sample(all.begin(), all.end(), std::back_inserter(pick), rows, rng);
    Eigen::MatrixXd t(rows, theta.cols()), d(rows, data.xdot.cols());
    for (Eigen::Index r = 0; r < rows; ++r) {
      t.row(r) = theta.row(pick[static_cast<std::size_t>(r)]);
      d.row(r) = data.xdot.row(pick[static_cast<std::size_t>(r)]);
    }
    members[static_cast<std::size_t>(k)] =
        detail::FitTheta(t, d, library, opts).coefficients;
  });

  const Eigen::Index p = library.size(), n = library.n_states();
  EnsembleModel out;
  out.member_count = ens.n_models;
  out.subsample_fraction = ens.subsample_fraction;
  out.inclusion_threshold = ens.inclusion_threshold;
  out.coefficient_median.resize(p, n);
  out.inclusion_probability.resize(p, n);
  std::vector<double> values(static_cast<std::size_t>(ens.n_models));
  for (Eigen::Index r = 0; r < p; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      int nonzero = 0;
      for (int k = 0; k < ens.n_models; ++k) {
        const double v = members[static_cast<std::size_t>(k)](r, c);
        values[static_cast<std::size_t>(k)] = v;
        if (v != 0.0) ++nonzero;
      }
      std::sort(values.begin(), values.end());
      const std::size_t mid = values.size() / 2;
      const double median = values.size() % 2 == 1
                                ? values[mid]
                                : 0.5 * (values[mid - 1] + values[mid]);
      const double prob = static_cast<double>(nonzero) / ens.n_models;
      out.inclusion_probability(r, c) = prob;
      out.coefficient_median(r, c) = prob < ens.inclusion_threshold ? 0.0 : median;
    }

  out.model = plain;
  out.model.coefficients = out.coefficient_median;
  if (opts.constraint_blocks)
    out.model.reconstructed_columns = ReconstructBlocks(
        out.model.coefficients, out.model.constraint_blocks, out.model.threshold);
  return out;
}

}  // namespace repsindy

#endif  // REPSINDY_SINDY_HPP_
