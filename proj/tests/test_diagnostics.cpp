#include <doctest.h>

#include <Eigen/Core>
#include <Eigen/Dense>
#include <cmath>

#include "crpd/diagnostics.hpp"
#include "crpd/errors.hpp"
#include "crpd/inner_solver.hpp"
#include "crpd/rng.hpp"

using crpd::Gamma;
using crpd::WeightSummary;

TEST_CASE("weight summary quartiles interpolate order statistics") {
  Eigen::VectorXd w(4);
  w << 4, 1, 3, 2;  // order does not matter
  WeightSummary s = crpd::weight_summary(w);
  CHECK(s.min == 1.0);
  CHECK(s.q1 == doctest::Approx(1.75));
  CHECK(s.median == doctest::Approx(2.5));
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.q3 == doctest::Approx(3.25));
  CHECK(s.max == 4.0);

  Eigen::VectorXd one(1);
  one << 0.7;
  WeightSummary s1 = crpd::weight_summary(one);
  CHECK(s1.min == 0.7);
  CHECK(s1.q1 == 0.7);
  CHECK(s1.median == 0.7);
  CHECK(s1.q3 == 0.7);
  CHECK(s1.max == 0.7);

  Eigen::VectorXd odd(5);
  odd << 10, 20, 30, 40, 50;
  WeightSummary s5 = crpd::weight_summary(odd);
  CHECK(s5.q1 == doctest::Approx(20.0));
  CHECK(s5.median == doctest::Approx(30.0));
  CHECK(s5.q3 == doctest::Approx(40.0));
}

TEST_CASE("curvature coefficient matches the scalar hand value") {
  // n = 3, g = (1, 2, -2), tilting limit:
  // omega = 3, gbar = 1/3, v = (1/3) sqrt(3) / 3 = 1/(3 sqrt(3)),
  // bracket = (1/3)(v^2)(1 + 8 - 8) ... assembled by hand: 1/486.
  Eigen::MatrixXd g(3, 1);
  g << 1, 2, -2;
  Eigen::VectorXd b = crpd::b_lambda(g, Gamma(0.0));
  REQUIRE(b.size() == 1);
  CHECK(std::fabs(b[0] - 1.0 / 486.0) <= 1e-10);
}

TEST_CASE("curvature coefficient vanishes at gamma = 1 and scales linearly in (1 - gamma)") {
  Eigen::MatrixXd g(6, 2);
  g << 0.3, -1.2, -0.7, 0.4, 1.9, 0.8, -0.2, -0.6, 0.5, 1.1, -1.4, -0.3;
  CHECK(crpd::b_lambda(g, Gamma(1.0)).norm() == 0.0);

  const Eigen::VectorXd b0 = crpd::b_lambda(g, Gamma(0.0));
  const Eigen::VectorXd bm1 = crpd::b_lambda(g, Gamma(-1.0));
  const Eigen::VectorXd bh = crpd::b_lambda(g, Gamma(0.5));
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(bm1[i] == doctest::Approx(2.0 * b0[i]).epsilon(1e-12));
    CHECK(bh[i] == doctest::Approx(0.5 * b0[i]).epsilon(1e-12));
  }
}

TEST_CASE("curvature coefficient agrees with a direct dense evaluation") {
  crpd::RngStream rng(11, 2);
  Eigen::MatrixXd g(15, 3);
  for (Eigen::Index i = 0; i < 15; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) g(i, j) = rng.next_normal();

  const double gamma = -0.4;
  const Eigen::VectorXd got = crpd::b_lambda(g, Gamma(gamma));

  const double n = 15.0;
  const Eigen::MatrixXd omega = g.transpose() * g / n;
  const Eigen::VectorXd gbar = g.colwise().mean().transpose();
  const Eigen::VectorXd v = omega.ldlt().solve(std::sqrt(n) * gbar);
  Eigen::VectorXd bracket = Eigen::VectorXd::Zero(3);
  for (Eigen::Index i = 0; i < 15; ++i) {
    const double s = v.dot(g.row(i).transpose());
    bracket += s * s * g.row(i).transpose();
  }
  bracket /= n;
  const Eigen::VectorXd expect = 0.5 * (1.0 - gamma) * omega.ldlt().solve(bracket);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("curvature coefficient rejects a singular second-moment matrix") {
  Eigen::MatrixXd g(4, 2);
  g.col(0) << 1, -1, 2, -2;
  g.col(1) = 2.0 * g.col(0);
  CHECK_THROWS_AS(crpd::b_lambda(g, Gamma(0.0)), crpd::SingularOmega);
}

TEST_CASE("location-multiplier statistic scales by the branch constant") {
  crpd::MultiplierState st;
  st.delta_shift = 0.002;
  const auto at0 = crpd::delta_statistic(st, 100, Gamma(0.0));
  CHECK(at0.raw == doctest::Approx(0.2));
  REQUIRE(at0.scaled.has_value());
  // scale -(gamma+1)/2 = -1/2
  CHECK(*at0.scaled == doctest::Approx(-0.4));

  const auto at_half = crpd::delta_statistic(st, 100, Gamma(0.5));
  REQUIRE(at_half.scaled.has_value());
  CHECK(*at_half.scaled == doctest::Approx(0.2 / (-0.75)));

  const auto el = crpd::delta_statistic(st, 100, Gamma(-1.0));
  CHECK(el.raw == doctest::Approx(0.2));
  CHECK_FALSE(el.scaled.has_value());
}

TEST_CASE("second-order report bundles the diagnostics at a solved state") {
  Eigen::MatrixXd g(8, 1);
  g << -2.1, -1.3, -0.4, 0.2, 0.7, 1.1, 1.8, 2.6;
  const Gamma gamma(0.5);
  const crpd::MultiplierState st = crpd::solve_multipliers(g, gamma);
  REQUIRE(st.converged);

  const crpd::SecondOrderReport rep = crpd::second_order_report(g, st, gamma);
  CHECK(rep.b_lambda.size() == 1);
  CHECK(rep.lambda_first_order.size() == 1);

  const double omega = g.col(0).squaredNorm() / 8.0;
  const double gbar = g.col(0).mean();
  CHECK(rep.lambda_first_order[0] == doctest::Approx(gbar / omega).epsilon(1e-12));

  CHECK(rep.delta_stat.raw == doctest::Approx(8.0 * st.delta_shift));
  CHECK(rep.weights.min <= rep.weights.q1);
  CHECK(rep.weights.q1 <= rep.weights.median);
  CHECK(rep.weights.median <= rep.weights.q3);
  CHECK(rep.weights.q3 <= rep.weights.max);
  CHECK(rep.weights.mean == doctest::Approx(st.weights.mean()));
}
