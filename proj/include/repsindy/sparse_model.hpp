#ifndef REPSINDY_SPARSE_MODEL_HPP_
#define REPSINDY_SPARSE_MODEL_HPP_

#include <vector>

#include <Eigen/Dense>

#include "repsindy/errors.hpp"
#include "repsindy/library.hpp"

namespace repsindy {

/// Groups of state indices whose values sum to one (one group per population).
using ConstraintBlocks = std::vector<std::vector<int>>;

/// Identified (or ground-truth) right-hand side: xdot = Theta(x) * coefficients.
struct SparseModel {
  FeatureLibrary library;
  Eigen::MatrixXd coefficients;  // features x states
  double threshold = 0.0;
  std::vector<int> reconstructed_columns;
  ConstraintBlocks constraint_blocks;

  int n_states() const { return library.n_states(); }

  static SparseModel Zero(const FeatureLibrary& library) {
    SparseModel m;
    m.library = library;
    m.coefficients = Eigen::MatrixXd::Zero(library.size(), library.n_states());
    return m;
  }
};

inline Eigen::VectorXd predict(const SparseModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.n_states())
    throw DimensionError("predict: state dimension mismatch");
  return (model.library.Evaluate(x) * model.coefficients).transpose();
}

inline Eigen::MatrixXd predict(const SparseModel& model, const Eigen::MatrixXd& X) {
  return model.library.Evaluate(X) * model.coefficients;
}

inline void CheckBlocks(const ConstraintBlocks& blocks, int n_states) {
  std::vector<bool> seen(static_cast<std::size_t>(n_states), false);
  for (const auto& block : blocks) {
    if (block.empty()) throw DimensionError("empty constraint block");
    for (int i : block) {
      if (i < 0 || i >= n_states)
        throw DimensionError("constraint block index " + std::to_string(i) +
                             " out of range");
      if (seen[static_cast<std::size_t>(i)])
        throw DimensionError("state " + std::to_string(i) +
                             " appears in more than one constraint block");
      seen[static_cast<std::size_t>(i)] = true;
    }
  }
}

/// Fills the last column of every block with the negated sum of the block's
/// other columns, so each block's derivatives sum to zero.
///
/// Entries of the reconstructed column that would fall below `threshold` are
/// set to zero and the residual is spread evenly over the nonzero fitted
/// entries of that row; the column-sum identity still holds exactly. The
/// spread is skipped when it would push a fitted entry below the threshold.
inline std::vector<int> ReconstructBlocks(Eigen::MatrixXd& coefficients,
                                          const ConstraintBlocks& blocks,
                                          double threshold) {
  std::vector<int> reconstructed;
  for (const auto& block : blocks) {
    if (block.size() < 2) continue;
    const int last = block.back();
    const std::vector<int> fitted(block.begin(), block.end() - 1);
    for (Eigen::Index r = 0; r < coefficients.rows(); ++r) {
      double sum = 0.0;
      for (int j : fitted) sum += coefficients(r, j);
      double value = -sum;
      if (value != 0.0 && std::abs(value) < threshold) {
        std::vector<int> nonzero;
        for (int j : fitted)
          if (coefficients(r, j) != 0.0) nonzero.push_back(j);
        const double share = value / static_cast<double>(nonzero.size());
        bool ok = !nonzero.empty();
        for (int j : nonzero)
          if (std::abs(coefficients(r, j) + share) < threshold) ok = false;
        if (ok) {
          for (int j : nonzero) coefficients(r, j) += share;
          double check = 0.0;
          for (int j : fitted) check += coefficients(r, j);
          value = -check;
          if (std::abs(value) < threshold) value = 0.0;
        }
      }
      coefficients(r, last) = value;
    }
    reconstructed.push_back(last);
  }
  return reconstructed;
}

}  // namespace repsindy

#endif  // REPSINDY_SPARSE_MODEL_HPP_
