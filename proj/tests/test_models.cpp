#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <limits>

#include "crpd/errors.hpp"
#include "crpd/moment_model.hpp"

using crpd::BoundModel;
using crpd::Dataset;
using crpd::MomentModel;
using crpd::MomentRecipe;

namespace {

Dataset one_column(std::initializer_list<double> xs) {
  Dataset d;
  d.columns = {"x"};
  d.values.resize(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) d.values(i++, 0) = x;
  return d;
}

}  // namespace

TEST_CASE("dataset column lookup and row subsetting") {
  Dataset d;
  d.columns = {"a", "b"};
  d.values.resize(3, 2);
  d.values << 1, 10, 2, 20, 3, 30;
  CHECK(d.column_index("a") == 0);
  CHECK(d.column_index("b") == 1);
  CHECK(d.column_index("c") == -1);
  Dataset s = d.subset_rows({2, 0});
  CHECK(s.n() == 2);
  CHECK(s.values(0, 1) == 30);
  CHECK(s.values(1, 0) == 1);
}

TEST_CASE("central moments model evaluates the three components") {
  MomentModel m = crpd::central_moments_model();
  CHECK(m.p == 2);
  CHECK(m.q == 3);
  double z = 2.0;
  double theta[2] = {0.5, 2.0};
  double g[3];
  m.eval(std::span<const double>(&z, 1), std::span<const double>(theta, 2),
         std::span<double>(g, 3));
  CHECK(g[0] == doctest::Approx(1.5));
  CHECK(g[1] == doctest::Approx(1.5 * 1.5 - 2.0));
  CHECK(g[2] == doctest::Approx(1.5 * 1.5 * 1.5));

  double jac[6];
  m.jacobian(std::span<const double>(&z, 1), std::span<const double>(theta, 2),
             std::span<double>(jac, 6));
  CHECK(jac[0] == -1.0);
  CHECK(jac[1] == doctest::Approx(-3.0));
  CHECK(jac[2] == doctest::Approx(-3.0 * 1.5 * 1.5));
  CHECK(jac[3] == 0.0);
  CHECK(jac[4] == -1.0);
  CHECK(jac[5] == 0.0);
}

TEST_CASE("model jacobians match finite differences of eval") {
  auto check_fd = [](const MomentModel& m, std::span<const double> z,
                     std::span<const double> theta) {
    const int q = m.q, p = m.p;
    std::vector<double> jac(static_cast<std::size_t>(q * p));
    m.jacobian(z, theta, jac);
    const double h = 1e-6;
    std::vector<double> th(theta.begin(), theta.end());
    std::vector<double> gp(static_cast<std::size_t>(q)), gm(gp);
    for (int c = 0; c < p; ++c) {
      th[static_cast<std::size_t>(c)] = theta[static_cast<std::size_t>(c)] + h;
      m.eval(z, th, gp);
      th[static_cast<std::size_t>(c)] = theta[static_cast<std::size_t>(c)] - h;
      m.eval(z, th, gm);
      th[static_cast<std::size_t>(c)] = theta[static_cast<std::size_t>(c)];
      for (int r = 0; r < q; ++r) {
        const double fd = (gp[static_cast<std::size_t>(r)] - gm[static_cast<std::size_t>(r)]) /
                          (2 * h);
        CHECK(jac[static_cast<std::size_t>(c * q + r)] == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  };

  double z1[1] = {1.7};
  double th2[2] = {0.3, 1.2};
  check_fd(crpd::central_moments_model(), std::span<const double>(z1, 1),
           std::span<const double>(th2, 2));

  double z2[2] = {3.0, 250.0};
  double th1[1] = {2.5};
  check_fd(crpd::instrumented_mean_model(), std::span<const double>(z2, 2),
           std::span<const double>(th1, 1));

  MomentRecipe r;
  r.level = true;
  r.square = true;
  r.cube = true;
  r.product = true;
  r.instruments = {"w1", "w2"};
  double z3[3] = {1.1, 0.4, -0.9};
  check_fd(crpd::linear_instrument_model("y", r), std::span<const double>(z3, 3),
           std::span<const double>(th2, 2));
}

TEST_CASE("linear instrument model validates its recipe") {
  MomentRecipe r;
  r.level = false;
  r.square = true;  // p = 2 but q = 1
  CHECK_THROWS_AS(crpd::linear_instrument_model("y", r), crpd::DimensionMismatch);
  r.square = false;
  r.product = true;  // no instrument columns named
  CHECK_THROWS_AS(crpd::linear_instrument_model("y", r), crpd::DimensionMismatch);
  CHECK_THROWS_AS(crpd::linear_instrument_model("", MomentRecipe{}), crpd::DimensionMismatch);

  r = MomentRecipe{};
  r.product = true;
  r.instruments = {"w"};
  MomentModel m = crpd::linear_instrument_model("y", r);
  CHECK(m.q == 2);
  CHECK(m.p == 1);
  CHECK(m.inputs == std::vector<std::string>{"y", "w"});
}

TEST_CASE("default bounds follow the sample statistics") {
  Dataset d = one_column({1, 2, 3, 4, 5, 6, 7, 8});
  auto box = crpd::central_moments_model().default_bounds(d);
  REQUIRE(box.size() == 2);
  const double mean = 4.5;
  const double var = 6.0;  // sum of squares 42 over n-1 = 7
  const double half = 6.0 * std::sqrt(var / 8.0);
  CHECK(box[0][0] == doctest::Approx(mean - half));
  CHECK(box[0][1] == doctest::Approx(mean + half));
  CHECK(box[1][0] == doctest::Approx(0.2 * var));
  CHECK(box[1][1] == doctest::Approx(5.0 * var));
}

TEST_CASE("bound model validates inputs and packs moments") {
  Dataset d = one_column({0.5, -1.0, 2.0, 1.0, -0.5});
  BoundModel bm(crpd::central_moments_model(), d);
  CHECK(bm.n() == 5);

  Eigen::VectorXd theta(2);
  theta << 0.0, 1.0;
  Eigen::MatrixXd g;
  bm.moments(theta, g);
  REQUIRE(g.rows() == 5);
  REQUIRE(g.cols() == 3);
  CHECK(g(0, 0) == doctest::Approx(0.5));
  CHECK(g(1, 1) == doctest::Approx(0.0));
  CHECK(g(2, 2) == doctest::Approx(8.0));

  Eigen::MatrixXd jac;
  bm.mean_jacobian(theta, jac);
  REQUIRE(jac.rows() == 3);
  REQUIRE(jac.cols() == 2);
  CHECK(jac(0, 0) == doctest::Approx(-1.0));
  // (1/n) sum -2 (x_i - mu) = -2 * mean residual
  CHECK(jac(1, 0) == doctest::Approx(-2.0 * 0.4));
  CHECK(jac(1, 1) == doctest::Approx(-1.0));

  CHECK(bm.outcome_values()[2] == 2.0);
}

TEST_CASE("bound model rejects bad data") {
  Dataset d = one_column({1, 2, 3});  // n = 3 < q + 1 = 4
  CHECK_THROWS_AS(BoundModel(crpd::central_moments_model(), d), crpd::DimensionMismatch);

  Dataset named = one_column({1, 2, 3, 4, 5});
  named.columns = {"y"};
  CHECK_THROWS_AS(BoundModel(crpd::central_moments_model(), named), crpd::MissingColumn);

  Dataset bad = one_column({1, 2, 3, 4, std::numeric_limits<double>::quiet_NaN()});
  CHECK_THROWS_AS(BoundModel(crpd::central_moments_model(), bad), crpd::DataError);

  Dataset ok = one_column({1, 2, 3, 4, 5});
  BoundModel bm(crpd::mean_only_model(), ok);
  Eigen::VectorXd theta(1);
  theta << 1.0;
  Eigen::MatrixXd g;
  CHECK_THROWS_AS(bm.moments(Eigen::VectorXd::Zero(2), g), crpd::DimensionMismatch);
}
