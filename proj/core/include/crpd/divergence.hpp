#pragma once

#include <Eigen/Core>

#include "crpd/gamma.hpp"

namespace crpd {

// Probability-vector distance to the uniform distribution 1/n within the
// power-divergence family indexed by gamma. Standardized so the uniform
// vector scores exactly zero on every branch.
//
//   generic: sum_i pi_i * ((n pi_i)^gamma - 1) / (gamma (gamma + 1))
//   gamma->0 limit: sum_i pi_i * log(n pi_i)
//   gamma->-1 limit: -(1/n) sum_i log(n pi_i)
//
// Throws NonPositiveWeight if any entry is <= 0 (or non-finite) and
// DimensionMismatch on an empty vector.
double crpd_divergence(const Eigen::Ref<const Eigen::VectorXd>& pi, Gamma gamma);

// Per-observation index argument t_i = delta_shift + lambda' g_i.
Eigen::VectorXd index_argument(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                               const Eigen::Ref<const Eigen::VectorXd>& lambda,
                               double delta_shift);

// Default positivity floor for the implied-weight argument. Keeps
// s^(1/gamma) finite in double precision over the gamma range of interest.
inline constexpr double default_kappa_pos = 1e-8;

// First-order-condition weight map in the shifted parametrization
// (delta_shift is the location multiplier measured from its population
// reference point, which keeps every branch finite). Returns pi_i = w_i / n:
//
//   generic: w_i = (1 - gamma t_i)^(1/gamma)
//   gamma->0 limit: w_i = exp(-t_i)
//   gamma->-1 limit: w_i = 1 / (1 + t_i)
//
// Weights are not renormalized; the multiplier equations are what enforce
// sum pi = 1. Throws InfeasibleIndex when the branch positivity floor is
// violated at some observation (no floor applies in the gamma->0 limit).
Eigen::VectorXd implied_weights_shifted(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                                        const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                        double delta_shift, Gamma gamma,
                                        double kappa_pos = default_kappa_pos);

// Same map in the raw parametrization, where delta is the untranslated
// location multiplier. Throws ElBranchDegenerate in the gamma->-1 limit,
// where the raw parametrization has no finite reference point.
Eigen::VectorXd implied_weights(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                                const Eigen::Ref<const Eigen::VectorXd>& lambda, double delta,
                                Gamma gamma, double kappa_pos = default_kappa_pos);

// Population value of the location multiplier, -1/(gamma+1). In the
// empirical-likelihood limit the raw value diverges, so the shifted
// reference 0 is returned with the degenerate flag set.
struct DeltaPopulation {
  double value = 0.0;
  bool el_degenerate = false;
};

DeltaPopulation delta_population(Gamma gamma);

}  // namespace crpd
