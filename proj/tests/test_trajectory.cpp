#include <cmath>
#include <limits>

#include "catch_amalgamated.hpp"
#include "repsindy/trajectory.hpp"

using namespace repsindy;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Trajectory FromFunction(double h, int m, double (*f)(double)) {
  Trajectory t;
  t.times.resize(m);
  t.states.resize(m, 1);
  for (int i = 0; i < m; ++i) {
    t.times(i) = i * h;
    t.states(i, 0) = f(i * h);
  }
  return t;
}

}  // namespace

TEST_CASE("rk4 step") {
  const Eigen::Vector3d x(0.2, 0.5, 0.3);
  const Rhs zero = [](const Eigen::VectorXd& v) { return Eigen::VectorXd::Zero(v.size()).eval(); };
  CHECK(rk4_step(zero, x, 0.1) == x);

  const Rhs grow = [](const Eigen::VectorXd& v) { return v; };
  const double h = 0.1;
  const double taylor = 1 + h + h * h / 2 + h * h * h / 6 + h * h * h * h / 24;
  CHECK_THAT(rk4_step(grow, Eigen::VectorXd::Ones(1), h)(0), WithinAbs(taylor, 1e-15));
  CHECK_THAT(rk4_step(grow, Eigen::VectorXd::Ones(1), h)(0), WithinAbs(1.1051708333333, 1e-12));

  const PayoffGame rps = builtin_game("rps");
  const Rhs rhs = [&](const Eigen::VectorXd& v) { return flat_rhs(rps, v); };
  CHECK_THAT(rk4_step(rhs, x, 0.05).sum(), WithinAbs(1.0, 1e-14));

  const Rhs bad = [](const Eigen::VectorXd& v) {
    return Eigen::VectorXd::Constant(v.size(), std::numeric_limits<double>::quiet_NaN()).eval();
  };
  CHECK_THROWS_AS(rk4_step(bad, x, 0.1), NumericalError);
}

TEST_CASE("simulate") {
  const PayoffGame rps = builtin_game("rps");
  CHECK(simulate(rps, SimplexPoint{0.5, 0.3, 0.2}, 0.01, 0.01).samples() == 2);
  CHECK(simulate(rps, SimplexPoint{0.5, 0.3, 0.2}, 10.0, 0.01).samples() == 1001);
  CHECK(simulate(rps, SimplexPoint{0.5, 0.3, 0.2}, 9.9, 0.1).samples() == 100);
  CHECK_THROWS_AS(simulate(rps, SimplexPoint{0.5, 0.3, 0.2}, 0.01, 0.1), NumericalError);
  CHECK_THROWS_AS(simulate(rps, SimplexPoint{0.5, 0.5}, 1.0, 0.1), DimensionError);

  SECTION("RPS conserves the product and the simplex") {
    const Trajectory t = simulate(rps, SimplexPoint{0.5, 0.3, 0.2}, 50.0, 0.01);
    double prod_drift = 0, sum_drift = 0;
    for (Eigen::Index i = 0; i < t.samples(); ++i) {
      prod_drift = std::max(prod_drift, std::abs(t.states.row(i).prod() - 0.03));
      sum_drift = std::max(sum_drift, std::abs(t.states.row(i).sum() - 1.0));
    }
    CHECK(prod_drift < 1e-6);
    CHECK(sum_drift < 1e-9);
  }

  SECTION("faces are invariant") {
    const Trajectory t = simulate(rps, SimplexPoint{0.6, 0.4, 0.0}, 20.0, 0.01);
    CHECK(t.states.col(2).isZero(0));
  }

  SECTION("BoS rests at its interior fixed point") {
    const PayoffGame bos = builtin_game("battle_of_sexes");
    const BipopulationState s{{2.0 / 3, 1.0 / 3}, {1.0 / 3, 2.0 / 3}};
    const Trajectory t = simulate(bos, s, 10.0, 0.01);
    for (Eigen::Index i = 0; i < t.samples(); ++i)
      CHECK((t.states.row(i).transpose() - s.Concatenated()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("exact derivatives") {
  const PayoffGame rps = builtin_game("rps");
  Trajectory pinned = simulate(rps, SimplexPoint{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0, 0.1);
  pinned = exact_derivatives(rps, pinned);
  CHECK(pinned.derivatives->cwiseAbs().maxCoeff() < 1e-15);

  Trajectory t = exact_derivatives(rps, simulate(rps, SimplexPoint{0.5, 0.3, 0.2}, 5.0, 0.01));
  const Eigen::RowVectorXd d0 = t.derivatives->row(0);
  CHECK_THAT(d0(0), WithinAbs(-0.05, 1e-15));
  CHECK_THAT(d0(1), WithinAbs(0.09, 1e-15));
  CHECK_THAT(d0(2), WithinAbs(-0.04, 1e-15));
  CHECK(t.derivatives->rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(exact_derivatives(builtin_game("battle_of_sexes"), t), DimensionError);
}

TEST_CASE("finite differences") {
  const double h = 0.37;
  const Trajectory lin = finite_difference_derivatives(
      FromFunction(h, 9, [](double s) { return 1.5 - 2.0 * s; }));
  CHECK(lin.derivatives->cwiseAbs().maxCoeff() > 0);
  for (Eigen::Index i = 0; i < 9; ++i) CHECK_THAT((*lin.derivatives)(i, 0), WithinAbs(-2.0, 1e-12));

  const Trajectory quad =
      finite_difference_derivatives(FromFunction(h, 9, [](double s) { return s * s; }));
  for (Eigen::Index i = 0; i < 9; ++i)
    CHECK_THAT((*quad.derivatives)(i, 0), WithinAbs(2.0 * quad.times(i), 1e-12));

  const Trajectory sine =
      finite_difference_derivatives(FromFunction(0.01, 700, [](double s) { return std::sin(s); }));
  double err = 0;
  for (Eigen::Index i = 1; i + 1 < sine.samples(); ++i)
    err = std::max(err, std::abs((*sine.derivatives)(i, 0) - std::cos(sine.times(i))));
  CHECK(err <= 2e-5);

  CHECK_THROWS_AS(finite_difference_derivatives(FromFunction(0.1, 2, [](double s) { return s; })),
                  TooShort);

  SECTION("agrees with exact derivatives on RPS") {
    const PayoffGame rps = builtin_game("rps");
    const Trajectory t = simulate(rps, SimplexPoint{0.5, 0.3, 0.2}, 10.0, 0.01);
    const Trajectory fd = finite_difference_derivatives(t);
    const Trajectory ex = exact_derivatives(rps, t);
    CHECK((*fd.derivatives - *ex.derivatives).cwiseAbs().maxCoeff() < 5e-4);
  }
}

TEST_CASE("sample_simplex") {
  const SimplexPoint a = sample_simplex(4, 99);
  CHECK_THAT(a.vector().sum(), WithinAbs(1.0, 1e-12));
  CHECK((a.vector().array() >= 0).all());
  CHECK(sample_simplex(4, 99).vector() == a.vector());
  CHECK(sample_simplex(4, 100).vector() != a.vector());
  CHECK_THROWS_AS(sample_simplex(1, 0), DimensionError);

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  const int n = 100000;
  for (int k = 0; k < n; ++k) mean += sample_simplex(3, static_cast<std::uint64_t>(k)).vector();
  mean /= n;
  for (int i = 0; i < 3; ++i) CHECK_THAT(mean(i), WithinAbs(1.0 / 3, 0.01));
}

TEST_CASE("add_noise") {
  const PayoffGame rps = builtin_game("rps");
  const Trajectory clean = exact_derivatives(rps, simulate(rps, SimplexPoint{0.5, 0.3, 0.2}, 10, 0.01));
  const Trajectory same = add_noise(clean, {0.0, 1});
  CHECK(same.states == clean.states);
  CHECK(*same.derivatives == *clean.derivatives);

  Trajectory big;
  big.times = Eigen::VectorXd::LinSpaced(50000, 0, 1);
  big.states = Eigen::MatrixXd::Zero(50000, 2);
  const Trajectory noisy = add_noise(big, {0.01, 5});
  const double mean = noisy.states.mean();
  const double sd = std::sqrt((noisy.states.array() - mean).square().sum() / (100000.0 - 1));
  CHECK_THAT(sd, WithinRel(0.01, 0.05));
  CHECK(add_noise(big, {0.01, 5}).states == noisy.states);
  CHECK(noisy.meta.noise_sigma == 0.01);
}

TEST_CASE("to_barycentric") {
  auto check = [](SimplexPoint x, double u, double v) {
    const auto [a, b] = to_barycentric(x);
    CHECK_THAT(a, WithinAbs(u, 1e-15));
    CHECK_THAT(b, WithinAbs(v, 1e-15));
  };
  check({1, 0, 0}, 0, 0);
  check({0, 1, 0}, 1, 0);
  check({0, 0, 1}, 0.5, 0.8660254037844386);
  check({1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.5, 0.28867513459481287);

  const Eigen::Vector3d a(0.1, 0.6, 0.3), b(0.7, 0.2, 0.1);
  const auto [mu, mv] = to_barycentric(Eigen::VectorXd(0.5 * a + 0.5 * b));
  const auto [au, av] = to_barycentric(Eigen::VectorXd(a));
  const auto [bu, bv] = to_barycentric(Eigen::VectorXd(b));
  CHECK_THAT(mu, WithinAbs(0.5 * (au + bu), 1e-15));
  CHECK_THAT(mv, WithinAbs(0.5 * (av + bv), 1e-15));

  CHECK_THROWS_AS(to_barycentric(SimplexPoint{0.5, 0.5}), DimensionError);
}
