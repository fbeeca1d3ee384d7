#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "crpd/divergence.hpp"
#include "crpd/errors.hpp"
#include "crpd/inner_solver.hpp"
#include "crpd/rng.hpp"

using crpd::Gamma;
using crpd::InnerSolver;
using crpd::MultiplierState;
using crpd::SolverConfig;
using crpd::SolverStatus;

namespace {

Eigen::MatrixXd canonical4() {
  Eigen::MatrixXd g(4, 1);
  g << -2.5, -0.5, 1.5, 3.5;
  return g;
}

// Constraint residual recomputed from scratch through the public weight map.
Eigen::VectorXd residual_of(const Eigen::MatrixXd& g, const Eigen::VectorXd& lambda,
                            double delta_shift, Gamma gamma) {
  const Eigen::VectorXd pi = crpd::implied_weights_shifted(g, lambda, delta_shift, gamma);
  Eigen::VectorXd r(g.cols() + 1);
  r[0] = pi.sum() - 1.0;
  r.tail(g.cols()) = g.transpose() * pi;
  return r;
}

}  // namespace

TEST_CASE("solver reproduces hand-checked multipliers on every branch") {
  const Eigen::MatrixXd g = canonical4();
  struct Known {
    double gamma, lambda, delta_shift;
  };
  // Fixed points of the constraint system for this moment vector; the
  // gamma = 1 pair is exact by hand (weights 1.3, 1.1, 0.9, 0.7).
  const Known known[] = {
      {1.0, 0.1, -0.05},
      {0.5, 0.10063908886531837, -0.037618935305054307},
      {0.0, 0.10115499653170199, -0.025143462149729935},
      {-0.5, 0.10156070139175229, -0.012596791027013981},
      {-1.0, 0.10187917131511418, 0.0},
  };
  for (const auto& k : known) {
    CAPTURE(k.gamma);
    MultiplierState st = crpd::solve_multipliers(g, Gamma(k.gamma));
    REQUIRE(st.converged);
    CHECK(st.status == SolverStatus::converged);
    CHECK(st.lambda[0] == doctest::Approx(k.lambda).epsilon(1e-9));
    CHECK(st.delta_shift == doctest::Approx(k.delta_shift).epsilon(1e-9).scale(1.0));
    CHECK(st.residual_norm <= 1e-10);
    CHECK(st.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  MultiplierState st = crpd::solve_multipliers(g, Gamma(1.0));
  CHECK(st.weights[0] == doctest::Approx(1.3 / 4).epsilon(1e-10));
  CHECK(st.weights[3] == doctest::Approx(0.7 / 4).epsilon(1e-10));
}

TEST_CASE("centered data is solved at the origin in one iteration") {
  Eigen::MatrixXd g(4, 1);
  g << -3.0, -1.0, 1.0, 3.0;
  for (double gam : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    MultiplierState st = crpd::solve_multipliers(g, Gamma(gam));
    REQUIRE(st.converged);
    CHECK(st.iterations == 1);
    CHECK(st.lambda[0] == 0.0);
    CHECK(st.delta_shift == 0.0);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(st.weights[i] == 0.25);
  }
}

TEST_CASE("solver satisfies the constraints on random instances") {
  crpd::RngStream rng(17, 0);
  int solved = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 20 + static_cast<int>(rng.next_u64() % 41);
    const int q = 1 + static_cast<int>(rng.next_u64() % 3);
    Eigen::MatrixXd g(n, q);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < q; ++j) g(i, j) = rng.next_normal();
    const double gam = -1.5 + rng.next_uniform() * 3.0;
    MultiplierState st = crpd::solve_multipliers(g, Gamma(gam));
    if (!st.converged) continue;
    ++solved;
    const Eigen::VectorXd r = residual_of(g, st.lambda, st.delta_shift, Gamma(gam));
    CHECK(r.lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(st.weights.minCoeff() > 0.0);
  }
  // Zero-mean designs of this size are almost always feasible.
  CHECK(solved >= 55);
}

TEST_CASE("analytic jacobian matches finite differences") {
  crpd::RngStream rng(99, 0);
  for (double gam : {-1.0, -0.4, 0.0, 0.7, 1.0, 2.0}) {
    CAPTURE(gam);
    Eigen::MatrixXd g(12, 2);
    for (Eigen::Index i = 0; i < 12; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) g(i, j) = rng.next_normal();
    Eigen::VectorXd lambda(2);
    lambda << 0.05, -0.08;
    const double ds = 0.03;
    const Eigen::MatrixXd jac = crpd::multiplier_jacobian(g, lambda, ds, Gamma(gam));
    REQUIRE(jac.rows() == 3);

    const double h = 1e-6;
    Eigen::VectorXd x(3);
    x << lambda[0], lambda[1], ds;
    for (int c = 0; c < 3; ++c) {
      Eigen::VectorXd xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const Eigen::VectorXd rp =
          residual_of(g, xp.head(2), xp[2], Gamma(gam));
      const Eigen::VectorXd rm =
          residual_of(g, xm.head(2), xm[2], Gamma(gam));
      const Eigen::VectorXd fd = (rp - rm) / (2 * h);
      // rows are (normalization, moments) in both layouts
      for (int r = 0; r < 3; ++r) {
        CHECK(jac(r, c) == doctest::Approx(fd[r]).epsilon(5e-6).scale(1.0));
      }
    }
  }
}

TEST_CASE("solver result matches a dense multiplier grid") {
  // Small instance, coarse oracle: the converged point must beat every grid
  // point's residual and sit within one grid cell of the grid argmin.
  Eigen::MatrixXd g(5, 1);
  g << -1.8, -0.6, 0.2, 0.9, 2.1;
  for (double gam : {1.0, -1.0}) {
    CAPTURE(gam);
    MultiplierState st = crpd::solve_multipliers(g, Gamma(gam));
    REQUIRE(st.converged);

    double best = std::numeric_limits<double>::infinity();
    double best_l = 0.0, best_d = 0.0;
    const int m = 200;
    for (int a = 0; a <= m; ++a) {
      for (int b = 0; b <= m; ++b) {
        Eigen::VectorXd lam(1);
        lam[0] = -1.0 + 2.0 * a / m;
        const double ds = -1.0 + 2.0 * b / m;
        double r;
        try {
          r = residual_of(g, lam, ds, Gamma(gam)).lpNorm<Eigen::Infinity>();
        } catch (const crpd::InfeasibleIndex&) {
          continue;
        }
        if (r < best) {
          best = r;
          best_l = lam[0];
          best_d = ds;
        }
      }
    }
    CHECK(st.residual_norm <= best);
    CHECK(std::fabs(st.lambda[0] - best_l) <= 2.0 / m + 1e-12);
    CHECK(std::fabs(st.delta_shift - best_d) <= 2.0 / m + 1e-12);
  }
}

TEST_CASE("strict-sign moment coordinates are reported infeasible") {
  Eigen::MatrixXd g(6, 1);
  g << 0.5, 1.0, 2.0, 0.1, 3.0, 0.4;
  MultiplierState st = crpd::solve_multipliers(g, Gamma(0.0));
  CHECK_FALSE(st.converged);
  CHECK(st.status == SolverStatus::infeasible_problem);
  // uniform placeholder weights, not garbage
  CHECK(st.weights.sum() == doctest::Approx(1.0));

  Eigen::MatrixXd g2(6, 2);
  g2.col(0) << -1, 1, -2, 2, 0.5, -0.5;
  g2.col(1) << -0.5, -1.0, -0.1, -2.0, -0.3, -0.7;
  CHECK(crpd::solve_multipliers(g2, Gamma(0.5)).status == SolverStatus::infeasible_problem);
}

TEST_CASE("degenerate designs are reported singular") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(5, 1);
  CHECK(crpd::solve_multipliers(g, Gamma(0.0)).status == SolverStatus::singular_jacobian);

  Eigen::MatrixXd g2(5, 2);
  g2.col(0) << -1, 1, -2, 2, 0;
  g2.col(1) = g2.col(0);  // collinear moments
  CHECK(crpd::solve_multipliers(g2, Gamma(0.5)).status == SolverStatus::singular_jacobian);
}

TEST_CASE("iteration budget is honored") {
  const Eigen::MatrixXd g = canonical4();
  SolverConfig cfg;
  cfg.max_iter = 1;
  MultiplierState st = crpd::solve_multipliers(g, Gamma(-1.0), cfg);
  CHECK_FALSE(st.converged);
  CHECK(st.status == SolverStatus::max_iterations);
  CHECK(st.iterations == 1);
  // the partial state still carries a finite residual and feasible weights
  CHECK(std::isfinite(st.residual_norm));
  CHECK(st.weights.minCoeff() > 0.0);
}

TEST_CASE("warm starts converge fast and do not change the answer") {
  const Eigen::MatrixXd g = canonical4();
  const Gamma gam(0.5);
  MultiplierState cold = crpd::solve_multipliers(g, gam);
  REQUIRE(cold.converged);

  MultiplierState warm = crpd::solve_multipliers(g, gam, {}, &cold);
  REQUIRE(warm.converged);
  CHECK(warm.iterations <= 2);
  CHECK(warm.lambda[0] == doctest::Approx(cold.lambda[0]).epsilon(1e-12));
  CHECK(warm.delta_shift == doctest::Approx(cold.delta_shift).epsilon(1e-12).scale(1.0));

  // an infeasible warm start falls back to the cold path bitwise
  MultiplierState bad;
  bad.lambda = Eigen::VectorXd::Constant(1, 50.0);
  bad.delta_shift = 50.0;
  MultiplierState fallback = crpd::solve_multipliers(g, Gamma(1.0), {}, &bad);
  MultiplierState plain = crpd::solve_multipliers(g, Gamma(1.0));
  CHECK(fallback.lambda[0] == plain.lambda[0]);
  CHECK(fallback.delta_shift == plain.delta_shift);
  CHECK(fallback.iterations == plain.iterations);
}

TEST_CASE("repeated solves are bitwise deterministic") {
  crpd::RngStream rng(7, 3);
  Eigen::MatrixXd g(30, 2);
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) g(i, j) = rng.next_normal();
  InnerSolver a, b;
  MultiplierState ra = a.solve(g, Gamma(0.3));
  MultiplierState rb = b.solve(g, Gamma(0.3));
  REQUIRE(ra.converged);
  CHECK(ra.lambda == rb.lambda);
  CHECK(ra.delta_shift == rb.delta_shift);
  CHECK(ra.weights == rb.weights);
  CHECK(ra.residual_norm == rb.residual_norm);

  // a reused solver instance gives the same result as a fresh one
  MultiplierState rc = a.solve(g, Gamma(0.3));
  CHECK(rc.lambda == ra.lambda);
  CHECK(rc.weights == ra.weights);
}

TEST_CASE("solver rejects malformed inputs") {
  Eigen::MatrixXd empty(3, 0);
  CHECK_THROWS_AS(crpd::solve_multipliers(empty, Gamma(0.0)), crpd::DimensionMismatch);
  Eigen::MatrixXd square(2, 2);
  square.setZero();
  CHECK_THROWS_AS(crpd::solve_multipliers(square, Gamma(0.0)), crpd::DimensionMismatch);

  Eigen::MatrixXd nan(4, 1);
  nan << 1.0, -1.0, std::numeric_limits<double>::quiet_NaN(), 0.5;
  CHECK(crpd::solve_multipliers(nan, Gamma(0.0)).status == SolverStatus::infeasible_problem);
}
