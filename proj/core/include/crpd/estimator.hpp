#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <vector>

#include "crpd/inner_solver.hpp"
#include "crpd/moment_model.hpp"

namespace crpd {

// Multi-round grid search over the parameter box. Each round lays an odd
// grid (so the box center is a grid point), takes the tie-broken argmin,
// shrinks the box around it and repeats. The sweep is sequential and
// warm-starts each inner solve from its predecessor.
struct SearchConfig {
  int grid_points_per_dim = 41;  // >= 3, odd
  int refine_rounds = 3;
  double refine_shrink = 0.2;
  // Overrides the model's data-driven default box when set.
  std::optional<std::vector<std::array<double, 2>>> bounds;
};

struct EstimationResult {
  Eigen::VectorXd theta_hat;
  double objective = 0.0;  // divergence at theta_hat
  MultiplierState multipliers;
  Eigen::VectorXd std_errors;
  Eigen::MatrixXd covariance;
  std::vector<std::array<double, 2>> confidence_intervals;
  double ci_level = 0.95;
  Gamma gamma{0.0};
  long objective_evaluations = 0;
  Eigen::Index n = 0;
};

// Divergence of the converged inner weights at theta; +infinity when the
// inner solve fails (failure is a value, not an exception).
double profiled_objective(const Eigen::Ref<const Eigen::VectorXd>& theta, const Dataset& data,
                          const MomentModel& model, Gamma gamma,
                          const SolverConfig& solver = {});

// Index of the smallest value; ties resolve to the lexicographically
// smallest theta. Throws AllInfinite when no value is finite.
std::size_t tie_break_argmin(const std::vector<double>& values,
                             const std::vector<Eigen::VectorXd>& thetas);

// Standard-error machinery at theta_hat: covariance
// (1/n) (Gbar' Omega^-1 Gbar)^-1 with Omega the uncentered second-moment
// matrix of g at theta_hat. Two-sided normal confidence intervals.
// Throws AllInfeasible when every grid point fails, RankDeficient when the
// covariance construction breaks down.
EstimationResult estimate(const Dataset& data, const MomentModel& model, Gamma gamma,
                          const SearchConfig& search = {}, const SolverConfig& solver = {},
                          double ci_level = 0.95);

// Quantile of the standard normal (used for interval half-widths).
double normal_quantile(double p);

}  // namespace crpd
