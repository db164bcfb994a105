#ifndef REPSINDY_GAME_MODELS_HPP_
#define REPSINDY_GAME_MODELS_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "repsindy/errors.hpp"
#include "repsindy/library.hpp"
#include "repsindy/sparse_model.hpp"

namespace repsindy {

/// A point of the probability simplex: nonnegative entries summing to one.
class SimplexPoint {
 public:
  static constexpr double kSumTolerance = 1e-12;

  SimplexPoint() = default;
  explicit SimplexPoint(Eigen::VectorXd x) : x_(std::move(x)) {
    if (x_.size() < 1) throw InvalidState("simplex point must be nonempty");
    for (Eigen::Index i = 0; i < x_.size(); ++i)
      if (!(x_(i) >= 0.0))
        throw InvalidState("simplex point has a negative or non-finite entry");
    if (std::abs(x_.sum() - 1.0) > kSumTolerance)
      throw InvalidState("simplex point entries must sum to 1");
  }
  SimplexPoint(std::initializer_list<double> values)
      : SimplexPoint(FromList(values)) {}

  const Eigen::VectorXd& vector() const { return x_; }
  Eigen::Index size() const { return x_.size(); }
  double operator()(Eigen::Index i) const { return x_(i); }

 private:
  static Eigen::VectorXd FromList(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double d : values) v(i++) = d;
    return v;
  }

  Eigen::VectorXd x_;
};

/// Row-population mix x and column-population mix y of a two-population game.
struct BipopulationState {
  SimplexPoint x;
  SimplexPoint y;

  Eigen::VectorXd Concatenated() const {
    Eigen::VectorXd z(x.size() + y.size());
    z << x.vector(), y.vector();
    return z;
  }
};

/// Symmetric games use `a` (n x n). Two-population games use `a` (m x k, row
/// player payoffs) and `b` (k x m, column player payoffs).
struct PayoffGame {
  enum class Kind { Symmetric, TwoPopulation };

  Kind kind = Kind::Symmetric;
  std::string name;
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;

  static PayoffGame Symmetric(std::string name, Eigen::MatrixXd a,
                              std::vector<std::string> labels) {
    PayoffGame g{Kind::Symmetric, std::move(name), std::move(a), {},
                 std::move(labels), {}};
    g.Validate();
    return g;
  }

  static PayoffGame TwoPopulation(std::string name, Eigen::MatrixXd a,
                                  Eigen::MatrixXd b,
                                  std::vector<std::string> row_labels,
                                  std::vector<std::string> col_labels) {
    PayoffGame g{Kind::TwoPopulation, std::move(name), std::move(a), std::move(b),
                 std::move(row_labels), std::move(col_labels)};
    g.Validate();
    return g;
  }

  bool symmetric() const { return kind == Kind::Symmetric; }
  int row_strategies() const { return static_cast<int>(a.rows()); }
  int col_strategies() const { return static_cast<int>(a.cols()); }

  /// Length of the flattened state (x then y for two-population games).
  int state_dimension() const {
    return symmetric() ? row_strategies() : row_strategies() + col_strategies();
  }

  ConstraintBlocks blocks() const {
    ConstraintBlocks out(1);
    for (int i = 0; i < row_strategies(); ++i) out[0].push_back(i);
    if (!symmetric()) {
      out.emplace_back();
      for (int j = 0; j < col_strategies(); ++j)
        out[1].push_back(row_strategies() + j);
    }
    return out;
  }

  /// State names for rendering: x_<label> (and y_<label> for the column side).
  std::vector<std::string> state_names() const {
    std::vector<std::string> names;
    for (const auto& l : row_labels) names.push_back("x_" + l);
    for (const auto& l : col_labels) names.push_back("y_" + l);
    return names;
  }

  void Validate() const {
    if (a.size() == 0) throw DimensionError("payoff matrix is empty");
    if (!a.allFinite() || !b.allFinite())
      throw NumericalError("payoff entries must be finite");
    if (symmetric()) {
      if (a.rows() != a.cols())
        throw DimensionError("symmetric game needs a square payoff matrix");
      if (b.size() != 0)
        throw DimensionError("symmetric game takes a single payoff matrix");
      if (static_cast<Eigen::Index>(row_labels.size()) != a.rows())
        throw DimensionError("label count must match strategy count");
    } else {
      if (b.rows() != a.cols() || b.cols() != a.rows())
        throw DimensionError("column payoffs must be the transpose shape of row payoffs");
      if (static_cast<Eigen::Index>(row_labels.size()) != a.rows() ||
          static_cast<Eigen::Index>(col_labels.size()) != a.cols())
        throw DimensionError("label counts must match strategy counts");
    }
  }
};

inline PayoffGame builtin_game(const std::string& name) {
  if (name == "rps") {
    Eigen::MatrixXd a(3, 3);
    a << 0, -1, 1,
         1, 0, -1,
         -1, 1, 0;
    return PayoffGame::Symmetric("rps", a, {"R", "P", "S"});
  }
  if (name == "battle_of_sexes") {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 2, 0,
         0, 1;
    b << 1, 0,
         0, 2;
    return PayoffGame::TwoPopulation("battle_of_sexes", a, b,
                                     {"Football", "Ballet"},
                                     {"Football", "Ballet"});
  }
  throw UnknownGame(name);
}

namespace detail {

inline void RequireSymmetric(const PayoffGame& game, Eigen::Index n) {
  if (!game.symmetric())
    throw DimensionError("operation requires a symmetric game");
  if (n != game.a.rows())
    throw DimensionError("state dimension " + std::to_string(n) +
                         " does not match game with " +
                         std::to_string(game.a.rows()) + " strategies");
}

// Raw (unvalidated) right-hand sides, used by the integrator on states that
// may drift off the simplex by rounding.
inline Eigen::VectorXd SymmetricRhs(const Eigen::MatrixXd& a,
                                    const Eigen::VectorXd& x) {
  const Eigen::VectorXd f = a * x;
  const double mean = x.dot(f);
  return x.cwiseProduct((f.array() - mean).matrix());
}

inline Eigen::VectorXd BipopulationRhs(const Eigen::MatrixXd& a,
                                       const Eigen::MatrixXd& b,
                                       const Eigen::VectorXd& z) {
  const Eigen::Index m = a.rows(), k = a.cols();
  const Eigen::VectorXd x = z.head(m), y = z.tail(k);
  const Eigen::VectorXd fx = a * y, fy = b * x;
  Eigen::VectorXd out(m + k);
  out.head(m) = x.cwiseProduct((fx.array() - x.dot(fx)).matrix());
  out.tail(k) = y.cwiseProduct((fy.array() - y.dot(fy)).matrix());
  return out;
}

}  // namespace detail

/// f_i = (A x)_i
inline Eigen::VectorXd fitness(const PayoffGame& game, const SimplexPoint& x) {
  detail::RequireSymmetric(game, x.size());
  return game.a * x.vector();
}

/// x . A x
inline double average_fitness(const PayoffGame& game, const SimplexPoint& x) {
  detail::RequireSymmetric(game, x.size());
  return x.vector().dot(game.a * x.vector());
}

inline Eigen::VectorXd replicator_rhs(const PayoffGame& game, const SimplexPoint& x) {
  detail::RequireSymmetric(game, x.size());
  return detail::SymmetricRhs(game.a, x.vector());
}

inline std::pair<Eigen::VectorXd, Eigen::VectorXd> replicator_rhs_bipopulation(
    const PayoffGame& game, const BipopulationState& s) {
  if (game.symmetric())
    throw DimensionError("operation requires a two-population game");
  if (s.x.size() != game.a.rows() || s.y.size() != game.a.cols())
    throw DimensionError("bipopulation state does not match game dimensions");
  const Eigen::VectorXd z = detail::BipopulationRhs(game.a, game.b, s.Concatenated());
  return {z.head(game.a.rows()), z.tail(game.a.cols())};
}

/// Flattened right-hand side on the concatenated state, for either kind.
inline Eigen::VectorXd flat_rhs(const PayoffGame& game, const Eigen::VectorXd& z) {
  if (z.size() != game.state_dimension())
    throw DimensionError("state dimension does not match game");
  return game.symmetric() ? detail::SymmetricRhs(game.a, z)
                          : detail::BipopulationRhs(game.a, game.b, z);
}

/// Expands the replicator right-hand side onto a monomial library.
///
/// Symmetric games use x_i (A x)_i - x_i (x.A.x), with opposite cubic terms
/// cancelling (so zero-sum games reduce to quadratics). Two-population games
/// use the pairwise form xdot_i = sum_{a != i} x_i x_a ((A y)_i - (A y)_a),
/// which equals the standard form on the simplex and reduces to
/// x (1 - x) ((A y)_1 - (A y)_2) for two strategies.
inline SparseModel ground_truth_coefficients(const PayoffGame& game,
                                             const FeatureLibrary& library) {
  const int n = game.state_dimension();
  if (library.n_states() != n)
    throw DimensionError("library state count does not match game");
  SparseModel model = SparseModel::Zero(library);
  model.constraint_blocks = game.blocks();

  auto add = [&](std::initializer_list<int> vars, int column, double value) {
    if (value == 0.0) return;
    std::vector<int> exps(static_cast<std::size_t>(n), 0);
    for (int v : vars) ++exps[static_cast<std::size_t>(v)];
    const int row = library.MonomialIndex(exps);
    if (row < 0)
      throw InsufficientLibrary("library of degree " +
                                std::to_string(library.degree()) +
                                " cannot express the replicator right-hand side");
    model.coefficients(row, column) += value;
  };

  const Eigen::MatrixXd& a = game.a;
  if (game.symmetric()) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) add({i, j}, i, a(i, j));
      // -x_i * sum_{j<=k} (A_jk + A_kj) x_j x_k, merged so antisymmetric parts
      // cancel before touching the library.
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
          const double c = (j == k) ? a(j, j) : a(j, k) + a(k, j);
          add({i, j, k}, i, -c);
        }
    }
  } else {
    const int m = game.row_strategies(), k = game.col_strategies();
    const Eigen::MatrixXd& b = game.b;
    for (int i = 0; i < m; ++i)
      for (int other = 0; other < m; ++other) {
        if (other == i) continue;
        for (int j = 0; j < k; ++j) add({i, other, m + j}, i, a(i, j) - a(other, j));
      }
    for (int j = 0; j < k; ++j)
      for (int other = 0; other < k; ++other) {
        if (other == j) continue;
        for (int i = 0; i < m; ++i)
          add({m + j, m + other, i}, m + j, b(j, i) - b(other, i));
      }
  }
  return model;
}

}  // namespace repsindy

#endif  // REPSINDY_GAME_MODELS_HPP_
