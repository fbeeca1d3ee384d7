#pragma once

#include <Eigen/Core>
#include <optional>

#include "crpd/gamma.hpp"
#include "crpd/inner_solver.hpp"

namespace crpd {

// Six-number weight summary; quartiles use the linear-interpolation
// definition (type 7): at probability p the index is h = (n-1) p and the
// value interpolates between the floor(h)-th and next order statistic.
struct WeightSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

WeightSummary weight_summary(const Eigen::Ref<const Eigen::VectorXd>& weights);

// Second-order curvature coefficient of the multiplier expansion,
//   ((1 - gamma)/2) * Omega^-1 * (1/n) sum_i (v' g_i)^2 g_i,
// with v = Omega^-1 sqrt(n) gbar and Omega the uncentered second-moment
// matrix of the rows. Identically zero at gamma = 1. Throws SingularOmega
// when Omega is not positive definite.
Eigen::VectorXd b_lambda(const Eigen::Ref<const Eigen::MatrixXd>& g_values, Gamma gamma);

// Scaled location-multiplier statistic. raw = n * delta_shift; scaled
// divides by -(gamma+1)/2, the large-sample scale at which the statistic
// follows a chi-square with q degrees of freedom. The scale vanishes in the
// empirical-likelihood limit, so scaled is absent there.
struct DeltaStatistic {
  double raw = 0.0;
  std::optional<double> scaled;
};

DeltaStatistic delta_statistic(const MultiplierState& state, Eigen::Index n, Gamma gamma);

// Bundled second-order diagnostics at a solved multiplier state.
struct SecondOrderReport {
  Eigen::VectorXd b_lambda;
  Eigen::VectorXd lambda_first_order;  // Omega^-1 gbar
  DeltaStatistic delta_stat;
  WeightSummary weights;
};

SecondOrderReport second_order_report(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                                      const MultiplierState& state, Gamma gamma);

}  // namespace crpd
