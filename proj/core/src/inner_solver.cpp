#include "crpd/inner_solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "crpd/errors.hpp"

namespace crpd {

namespace {

// Small integer power, |e| <= 8.
inline double powi(double x, int e) {
  double acc = 1.0;
  for (int i = 0; i < e; ++i) acc *= x;
  return acc;
}

// Shared Jacobian assembly. u holds the per-observation negative weight
// derivative -dw_i/dt_i, which is positive on every branch:
//   generic: s_i^(1/gamma - 1) = w_i / s_i
//   gamma->0: exp(-t_i) = w_i
//   gamma->-1: (1 + t_i)^-2 = w_i^2
void assemble_jacobian(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                       const Eigen::VectorXd& u, Eigen::MatrixXd& ug, Eigen::MatrixXd& jac) {
  const Eigen::Index n = g_values.rows();
  const Eigen::Index q = g_values.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  ug.resize(n, q);
  ug.array() = g_values.array().colwise() * u.array();
  jac.resize(q + 1, q + 1);
  jac(0, q) = -u.sum() * inv_n;
  for (Eigen::Index j = 0; j < q; ++j) {
    const double bj = ug.col(j).sum() * inv_n;
    jac(0, j) = -bj;
    jac(j + 1, q) = -bj;
  }
  jac.block(1, 0, q, q).noalias() = g_values.transpose() * ug * (-inv_n);
}

void weight_derivative(const Eigen::VectorXd& t, const Eigen::VectorXd& w, Gamma gamma,
                       Eigen::VectorXd& u) {
  const Eigen::Index n = t.size();
  u.resize(n);
  switch (gamma.branch()) {
    case GammaBranch::exponential_tilting:
      u = w;
      return;
    case GammaBranch::empirical_likelihood:
      u.array() = w.array().square();
      return;
    case GammaBranch::generic:
    default: {
      const double g = gamma.value();
      for (Eigen::Index i = 0; i < n; ++i) u[i] = w[i] / (1.0 - g * t[i]);
      return;
    }
  }
}

}  // namespace

const char* solver_status_name(SolverStatus s) {
  switch (s) {
    case SolverStatus::converged:
      return "converged";
    case SolverStatus::singular_jacobian:
      return "singular_jacobian";
    case SolverStatus::no_descent:
      return "no_descent";
    case SolverStatus::max_iterations:
      return "max_iterations";
    case SolverStatus::infeasible_problem:
      return "infeasible_problem";
  }
  return "unknown";
}

Eigen::MatrixXd multiplier_jacobian(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                                    const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                    double delta_shift, Gamma gamma, double kappa_pos) {
  // implied_weights_shifted validates feasibility and dimensions.
  const Eigen::VectorXd pi = implied_weights_shifted(g_values, lambda, delta_shift, gamma,
                                                     kappa_pos);
  const Eigen::VectorXd w = pi * static_cast<double>(g_values.rows());
  const Eigen::VectorXd t = index_argument(g_values, lambda, delta_shift);
  Eigen::VectorXd u;
  weight_derivative(t, w, gamma, u);
  Eigen::MatrixXd ug, jac;
  assemble_jacobian(g_values, u, ug, jac);
  return jac;
}

Eigen::MatrixXd multiplier_jacobian(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                                    const MultiplierState& state, Gamma gamma, double kappa_pos) {
  return multiplier_jacobian(g_values, state.lambda, state.delta_shift, gamma, kappa_pos);
}

// Evaluates the constraint residual at (lambda, delta_shift), filling t_, w_
// (weights on the w scale, mean 1 at the solution) and psi_. Returns false
// as soon as the branch positivity floor is violated.
bool InnerSolver::residual_pass(const Eigen::Ref<const Eigen::MatrixXd>& g_values, Gamma gamma,
                                const Eigen::VectorXd& lambda, double delta_shift) {
  const Eigen::Index n = g_values.rows();
  const Eigen::Index q = g_values.cols();
  t_.resize(n);
  t_.noalias() = g_values * lambda;
  t_.array() += delta_shift;
  w_.resize(n);

  switch (gamma.branch()) {
    case GammaBranch::exponential_tilting:
      w_.array() = (-t_.array()).exp();
      break;
    case GammaBranch::empirical_likelihood:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double s = 1.0 + t_[i];
        if (!(s >= cfg_.kappa_pos)) return false;
        w_[i] = 1.0 / s;
      }
      break;
    case GammaBranch::generic:
    default: {
      const double g = gamma.value();
      const double inv_g = 1.0 / g;
      const int k = static_cast<int>(std::lround(inv_g));
      const bool small_int_exponent =
          std::fabs(inv_g - static_cast<double>(k)) < 1e-12 && k != 0 && std::abs(k) <= 8;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double s = 1.0 - g * t_[i];
        if (!(s >= cfg_.kappa_pos)) return false;
        if (small_int_exponent) {
          w_[i] = k > 0 ? powi(s, k) : 1.0 / powi(s, -k);
        } else {
          w_[i] = std::pow(s, inv_g);
        }
      }
      break;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  psi_.resize(q + 1);
  psi_[0] = w_.sum() * inv_n - 1.0;
  psi_.tail(q).noalias() = g_values.transpose() * w_ * inv_n;
  return true;
}

MultiplierState InnerSolver::solve(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                                   Gamma gamma, const MultiplierState* warm_start) {
  const Eigen::Index n = g_values.rows();
  const Eigen::Index q = g_values.cols();
  if (q < 1) throw DimensionMismatch("moment matrix needs at least one column");
  if (n <= q) {
    throw DimensionMismatch("need n > q, got n = " + std::to_string(n) +
                            ", q = " + std::to_string(q));
  }

  MultiplierState state;
  state.lambda = Eigen::VectorXd::Zero(q);
  state.delta_shift = 0.0;

  if (!g_values.allFinite()) {
    state.status = SolverStatus::infeasible_problem;
    state.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    return state;
  }

  // A moment coordinate with a strict sign cannot average to zero under any
  // strictly positive weighting.
  for (Eigen::Index j = 0; j < q; ++j) {
    const double lo = g_values.col(j).minCoeff();
    const double hi = g_values.col(j).maxCoeff();
    if ((lo >= 0.0 && hi > 0.0) || (hi <= 0.0 && lo < 0.0)) {
      state.status = SolverStatus::infeasible_problem;
      state.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
      return state;
    }
  }

  // Start-point information check: the cold-start Jacobian is
  // [[-gbar', -1], [-Omega, -gbar]], nonsingular with the right orientation
  // exactly when Omega is positive definite and 1 - gbar' Omega^-1 gbar > 0.
  const double inv_n = 1.0 / static_cast<double>(n);
  gbar_ = g_values.colwise().sum().transpose() * inv_n;
  omega_.resize(q, q);
  omega_.noalias() = g_values.transpose() * g_values * inv_n;
  {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(omega_);
    const double scale = omega_.diagonal().maxCoeff();
    if (ldlt.info() != Eigen::Success ||
        (ldlt.vectorD().array() <= 1e-14 * std::max(scale, 1.0)).any()) {
      state.status = SolverStatus::singular_jacobian;
      state.weights = Eigen::VectorXd::Constant(n, inv_n);
      return state;
    }
    const double schur = 1.0 - gbar_.dot(ldlt.solve(gbar_));
    if (!(schur > 0.0)) {
      state.status = SolverStatus::singular_jacobian;
      state.weights = Eigen::VectorXd::Constant(n, inv_n);
      return state;
    }
  }

  Eigen::VectorXd lambda_cur = Eigen::VectorXd::Zero(q);
  double delta_cur = 0.0;
  if (warm_start != nullptr && warm_start->lambda.size() == q &&
      residual_pass(g_values, gamma, warm_start->lambda, warm_start->delta_shift) &&
      psi_.allFinite()) {
    lambda_cur = warm_start->lambda;
    delta_cur = warm_start->delta_shift;
  } else {
    residual_pass(g_values, gamma, lambda_cur, delta_cur);
  }
  double r_cur = psi_.lpNorm<Eigen::Infinity>();

  Eigen::FullPivLU<Eigen::MatrixXd> lu;
  int iter = 0;
  SolverStatus status = SolverStatus::max_iterations;
  bool converged = false;

  while (iter < cfg_.max_iter) {
    ++iter;

    weight_derivative(t_, w_, gamma, u_);
    assemble_jacobian(g_values, u_, ug_, jac_);
    lu.compute(jac_);
    if (!lu.isInvertible() || !jac_.allFinite()) {
      status = SolverStatus::singular_jacobian;
      break;
    }
    step_ = lu.solve(-psi_);

    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= cfg_.max_backtracks; ++bt) {
      trial_lambda_ = lambda_cur + alpha * step_.head(q);
      const double trial_delta = delta_cur + alpha * step_[q];
      if (residual_pass(g_values, gamma, trial_lambda_, trial_delta)) {
        const double r_trial = psi_.lpNorm<Eigen::Infinity>();
        if (std::isfinite(r_trial) && (r_trial <= cfg_.tol_inner || r_trial < r_cur)) {
          lambda_cur = trial_lambda_;
          delta_cur = trial_delta;
          r_cur = r_trial;
          accepted = true;
          break;
        }
      }
      alpha *= cfg_.backtrack_factor;
    }

    if (!accepted) {
      status = SolverStatus::no_descent;
      // t_/w_/psi_ hold the last rejected trial; restore the current state.
      residual_pass(g_values, gamma, lambda_cur, delta_cur);
      break;
    }
    if (r_cur <= cfg_.tol_inner) {
      status = SolverStatus::converged;
      converged = true;
      break;
    }
  }

  state.lambda = lambda_cur;
  state.delta_shift = delta_cur;
  state.weights = w_ * inv_n;
  state.residual_norm = r_cur;
  state.iterations = iter;
  state.converged = converged;
  state.status = status;
  return state;
}

MultiplierState solve_multipliers(const Eigen::Ref<const Eigen::MatrixXd>& g_values, Gamma gamma,
                                  const SolverConfig& config, const MultiplierState* warm_start) {
  InnerSolver solver(config);
  return solver.solve(g_values, gamma, warm_start);
}

}  // namespace crpd
