#ifndef REPSINDY_LIBRARY_HPP_
#define REPSINDY_LIBRARY_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "repsindy/errors.hpp"

namespace repsindy {

struct Feature {
  enum class Kind { Monomial, Sin, Cos };

  Kind kind = Kind::Monomial;
  std::vector<int> exponents;  // Monomial only, length n_states
  int state = -1;              // Sin / Cos only

  int total_degree() const {
    int d = 0;
    for (int e : exponents) d += e;
    return d;
  }

  bool operator==(const Feature&) const = default;
};

/// Candidate function set Theta. Monomials come first, ordered by total degree
/// and then by descending exponent vector (x1^2 before x1*x2 before x2^2);
/// sine features follow, then cosine features, each by state index.
class FeatureLibrary {
 public:
  FeatureLibrary() = default;

  FeatureLibrary(int n_states, int degree, bool include_trig)
      : n_states_(n_states), degree_(degree), include_trig_(include_trig) {
    if (n_states < 1) throw DimensionError("library needs n_states >= 1");
    if (degree < 0) throw ConfigError("library degree must be >= 0");
    std::vector<int> exps(static_cast<std::size_t>(n_states), 0);
    for (int d = 0; d <= degree; ++d) AppendDegree(exps, 0, d);
    if (include_trig) {
      for (int i = 0; i < n_states; ++i)
        features_.push_back({Feature::Kind::Sin, {}, i});
      for (int i = 0; i < n_states; ++i)
        features_.push_back({Feature::Kind::Cos, {}, i});
    }
  }

  int n_states() const { return n_states_; }
  int degree() const { return degree_; }
  bool include_trig() const { return include_trig_; }
  int size() const { return static_cast<int>(features_.size()); }
  const std::vector<Feature>& features() const { return features_; }
  const Feature& operator[](int j) const {
    return features_[static_cast<std::size_t>(j)];
  }

  /// Index of the monomial with the given exponents, or -1.
  int MonomialIndex(const std::vector<int>& exponents) const {
    for (int j = 0; j < size(); ++j) {
      const Feature& f = (*this)[j];
      if (f.kind == Feature::Kind::Monomial && f.exponents == exponents)
        return j;
    }
    return -1;
  }

  bool operator==(const FeatureLibrary& o) const {
    return n_states_ == o.n_states_ && degree_ == o.degree_ &&
           include_trig_ == o.include_trig_;
  }

  /// Row of Theta for a single state.
  Eigen::RowVectorXd Evaluate(const Eigen::VectorXd& x) const {
    CheckDim(x.size());
    Eigen::RowVectorXd row(size());
    for (int j = 0; j < size(); ++j) row(j) = EvaluateFeature((*this)[j], x);
    return row;
  }

  /// Theta(X): entry (i, j) is feature j at row i.
  Eigen::MatrixXd Evaluate(const Eigen::MatrixXd& X) const {
    CheckDim(X.cols());
    Eigen::MatrixXd theta(X.rows(), size());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const Eigen::VectorXd x = X.row(i).transpose();
      for (int j = 0; j < size(); ++j) theta(i, j) = EvaluateFeature((*this)[j], x);
    }
    return theta;
  }

  /// Human-readable name of feature j, e.g. "x_R*x_P^2" or "sin(x_R)".
  std::string FeatureName(int j, const std::vector<std::string>& names) const {
    const Feature& f = (*this)[j];
    if (f.kind == Feature::Kind::Sin)
      return "sin(" + names[static_cast<std::size_t>(f.state)] + ")";
    if (f.kind == Feature::Kind::Cos)
      return "cos(" + names[static_cast<std::size_t>(f.state)] + ")";
    std::string out;
    for (std::size_t i = 0; i < f.exponents.size(); ++i) {
      if (f.exponents[i] == 0) continue;
      if (!out.empty()) out += "*";
      out += names[i];
      if (f.exponents[i] > 1) out += "^" + std::to_string(f.exponents[i]);
    }
    return out.empty() ? "1" : out;
  }

 private:
  void AppendDegree(std::vector<int>& exps, std::size_t pos, int remaining) {
    if (pos + 1 == exps.size()) {
      exps[pos] = remaining;
      features_.push_back({Feature::Kind::Monomial, exps, -1});
      exps[pos] = 0;
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      exps[pos] = e;
      AppendDegree(exps, pos + 1, remaining - e);
    }
    exps[pos] = 0;
  }

  void CheckDim(Eigen::Index n) const {
    if (n != n_states_)
      throw DimensionError("library expects " + std::to_string(n_states_) +
                           " states, got " + std::to_string(n));
  }

  static double EvaluateFeature(const Feature& f,
                                const Eigen::Ref<const Eigen::VectorXd>& x) {
    switch (f.kind) {
      case Feature::Kind::Sin:
        return std::sin(x(f.state));
      case Feature::Kind::Cos:
        return std::cos(x(f.state));
      case Feature::Kind::Monomial:
        break;
    }
    double v = 1.0;
    for (std::size_t i = 0; i < f.exponents.size(); ++i)
      for (int k = 0; k < f.exponents[i]; ++k) v *= x(static_cast<Eigen::Index>(i));
    return v;
  }

  int n_states_ = 0;
  int degree_ = 0;
  bool include_trig_ = false;
  std::vector<Feature> features_;
};

inline FeatureLibrary build_library(int n_states, int degree, bool include_trig) {
  return FeatureLibrary(n_states, degree, include_trig);
}

}  // namespace repsindy

#endif  // REPSINDY_LIBRARY_HPP_
