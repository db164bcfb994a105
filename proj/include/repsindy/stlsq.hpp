#ifndef REPSINDY_STLSQ_HPP_
#define REPSINDY_STLSQ_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "repsindy/errors.hpp"

namespace repsindy {

struct StlsqOptions {
  double threshold = 0.05;
  int max_iter = 10;
  // Singular values below rank_tolerance * (largest singular value) are
  // treated as zero. Raise towards the noise level for noisy data.
  double rank_tolerance = 1e-6;
  // Scale Theta columns to unit norm before solving. Thresholding is always
  // applied to the unscaled coefficients.
  bool normalize_columns = false;
  int reweight_iterations = 50;
};

namespace detail {

/// Truncated-SVD minimum-norm solution of M c = z.
inline Eigen::VectorXd MinNormSolve(const Eigen::MatrixXd& M, const Eigen::VectorXd& z,
                                    double rank_tolerance, Eigen::Index* rank) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(M.cols());
  if (M.cols() == 0 || M.rows() == 0) {
    if (rank) *rank = 0;
    return c;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cut = s.size() > 0 ? rank_tolerance * s(0) : 0.0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!(s(i) > cut) || s(i) == 0.0) break;
    c += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(z) / s(i));
    ++r;
  }
  if (rank) *rank = r;
  return c;
}

/// Least-squares solve on a column subset. When the subset is numerically
/// rank deficient the solution set is an affine space; starting from its
/// minimum-norm member, iteratively reweighted minimum-norm solves
/// (c <- W (M W)^+ z with W = diag|c|) concentrate the weight on few columns
/// while keeping the residual at its minimum.
inline Eigen::VectorXd SubsetSolve(const Eigen::MatrixXd& M, const Eigen::VectorXd& z,
                                   const StlsqOptions& opts) {
  Eigen::Index rank = 0;
  Eigen::VectorXd c = MinNormSolve(M, z, opts.rank_tolerance, &rank);
  if (rank >= M.cols()) return c;
  for (int it = 0; it < opts.reweight_iterations; ++it) {
    const Eigen::VectorXd w = c.cwiseAbs();
    if (w.maxCoeff() == 0.0) break;
    Eigen::VectorXd next =
        w.cwiseProduct(MinNormSolve(M * w.asDiagonal(), z, opts.rank_tolerance, nullptr));
    const double change = (next - c).cwiseAbs().maxCoeff();
    c = std::move(next);
    if (change <= 1e-15 * std::max(1.0, c.cwiseAbs().maxCoeff())) break;
  }
  return c;
}

/// Theta and the targets reduced by a Householder QR so every subset solve
/// works on a features-sized system: ||Theta_S c - y|| differs from
/// ||R_S c - Q^T y|| by a constant independent of c.
struct CompressedSystem {
  Eigen::MatrixXd r;
  Eigen::MatrixXd z;
  Eigen::VectorXd scale;  // column norms (or ones)

  CompressedSystem(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& targets,
                   bool normalize) {
    const Eigen::Index m = theta.rows(), p = theta.cols();
    scale = Eigen::VectorXd::Ones(p);
    if (normalize)
      for (Eigen::Index j = 0; j < p; ++j) {
        const double nrm = theta.col(j).norm();
        if (nrm > 0.0) scale(j) = nrm;
      }
    if (m > p) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(theta);
      r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
      z = (qr.householderQ().transpose() * targets).topRows(p);
    } else {
      r = theta;
      z = targets;
    }
    r = r * scale.cwiseInverse().asDiagonal();
  }

  Eigen::VectorXd Solve(const std::vector<int>& support, Eigen::Index target,
                        const StlsqOptions& opts) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(r.cols());
    if (support.empty()) return out;
    Eigen::MatrixXd sub(r.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k)
      sub.col(static_cast<Eigen::Index>(k)) = r.col(support[k]);
    const Eigen::VectorXd c = SubsetSolve(sub, z.col(target), opts);
    for (std::size_t k = 0; k < support.size(); ++k)
      out(support[k]) = c(static_cast<Eigen::Index>(k)) / scale(support[k]);
    return out;
  }
};

inline void CheckStlsqInputs(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& targets,
                             const StlsqOptions& opts) {
  if (theta.rows() < 1 || theta.cols() < 1)
    throw DimensionError("stlsq needs at least one row and one library column");
  if (targets.rows() != theta.rows())
    throw DimensionError("Theta and targets must have the same number of rows");
  if (!theta.allFinite() || !targets.allFinite())
    throw NumericalError("stlsq input contains non-finite values");
  if (!(opts.threshold >= 0.0)) throw ConfigError("threshold must be >= 0");
  if (opts.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(opts.rank_tolerance >= 0.0 && opts.rank_tolerance < 1.0))
    throw ConfigError("rank_tolerance must lie in [0, 1)");
}

inline Eigen::VectorXd StlsqColumn(const CompressedSystem& sys, Eigen::Index target,
                                   const StlsqOptions& opts, std::vector<int> support) {
  Eigen::VectorXd c = sys.Solve(support, target, opts);
  for (int it = 0; it < opts.max_iter; ++it) {
    std::vector<int> keep;
    for (int j : support)
      if (std::abs(c(j)) >= opts.threshold) keep.push_back(j);
    if (keep == support) return c;
    support = std::move(keep);
    c = sys.Solve(support, target, opts);
  }
  // Iteration budget exhausted without a stable support: enforce the
  // threshold contract on the last solve.
  for (Eigen::Index j = 0; j < c.size(); ++j)
    if (std::abs(c(j)) < opts.threshold) c(j) = 0.0;
  return c;
}

}  // namespace detail

/// Sequentially thresholded least squares, one sparse coefficient column per
/// target column. `initial_support` (feature indices) restricts the first
/// solve; by default every feature is active.
inline Eigen::MatrixXd stlsq(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& targets,
                             const StlsqOptions& opts = {},
                             const std::optional<std::vector<int>>& initial_support = {}) {
  detail::CheckStlsqInputs(theta, targets, opts);
  const detail::CompressedSystem sys(theta, targets, opts.normalize_columns);
  std::vector<int> all;
  if (initial_support) {
    all = *initial_support;
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    for (int j : all)
      if (j < 0 || j >= theta.cols())
        throw DimensionError("initial support index out of range");
  } else {
    for (int j = 0; j < theta.cols(); ++j) all.push_back(j);
  }
  Eigen::MatrixXd xi(theta.cols(), targets.cols());
  for (Eigen::Index t = 0; t < targets.cols(); ++t)
    xi.col(t) = detail::StlsqColumn(sys, t, opts, all);
  return xi;
}

}  // namespace repsindy

#endif  // REPSINDY_STLSQ_HPP_
