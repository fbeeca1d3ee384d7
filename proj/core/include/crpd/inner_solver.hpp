#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <limits>

#include "crpd/divergence.hpp"
#include "crpd/gamma.hpp"

namespace crpd {

struct SolverConfig {
  double tol_inner = 1e-10;   // sup-norm residual tolerance
  int max_iter = 100;         // Newton iterations
  double kappa_pos = 1e-8;    // positivity floor for the weight argument
  double backtrack_factor = 0.5;
  int max_backtracks = 40;
};

enum class SolverStatus {
  converged,
  singular_jacobian,   // start-point information matrix unusable or step solve broke down
  no_descent,          // backtracking exhausted without a feasible decrease
  max_iterations,
  infeasible_problem,  // some moment coordinate has a strict sign, so no weight
                       // vector in the simplex can satisfy the constraints
};

const char* solver_status_name(SolverStatus s);

// Multiplier state for a fixed theta. Failure is a value: callers branch on
// `converged` and treat failed solves as an infinite profiled objective.
struct MultiplierState {
  Eigen::VectorXd lambda;
  double delta_shift = 0.0;          // location multiplier, measured from -1/(gamma+1)
  Eigen::VectorXd weights;           // implied probabilities pi (not renormalized)
  double residual_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  SolverStatus status = SolverStatus::max_iterations;
};

// Jacobian of the stacked constraint system
//   Psi_1 = (1/n) sum w_i - 1
//   Psi_2 = (1/n) sum w_i g_i
// with respect to (lambda, delta_shift); (q+1) x (q+1), row 0 is Psi_1.
// Requires a feasible state (throws InfeasibleIndex otherwise).
Eigen::MatrixXd multiplier_jacobian(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                                    const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                    double delta_shift, Gamma gamma,
                                    double kappa_pos = default_kappa_pos);

Eigen::MatrixXd multiplier_jacobian(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                                    const MultiplierState& state, Gamma gamma,
                                    double kappa_pos = default_kappa_pos);

// Newton solver for the multiplier system with step backtracking that
// enforces both weight-argument positivity and a strict residual decrease.
// Reusable across calls: workspaces are kept between solves so grid sweeps
// do not allocate. Deterministic: identical inputs (including warm start)
// give bit-identical states.
class InnerSolver {
 public:
  explicit InnerSolver(SolverConfig config = {}) : cfg_(config) {}

  const SolverConfig& config() const noexcept { return cfg_; }

  // warm_start, when given, seeds (lambda, delta_shift); an infeasible warm
  // start falls back to the cold start (0, 0), which is feasible on every
  // branch.
  MultiplierState solve(const Eigen::Ref<const Eigen::MatrixXd>& g_values, Gamma gamma,
                        const MultiplierState* warm_start = nullptr);

 private:
  bool residual_pass(const Eigen::Ref<const Eigen::MatrixXd>& g_values, Gamma gamma,
                     const Eigen::VectorXd& lambda, double delta_shift);

  SolverConfig cfg_;
  // workspaces sized on demand
  Eigen::VectorXd t_, w_, u_, trial_lambda_, psi_, step_, gbar_;
  Eigen::MatrixXd omega_, jac_, ug_;
};

// One-shot convenience wrapper around InnerSolver.
MultiplierState solve_multipliers(const Eigen::Ref<const Eigen::MatrixXd>& g_values, Gamma gamma,
                                  const SolverConfig& config = {},
                                  const MultiplierState* warm_start = nullptr);

}  // namespace crpd
