#include "crpd/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "crpd/divergence.hpp"
#include "crpd/errors.hpp"

namespace crpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

std::vector<std::array<double, 2>> resolve_bounds(const SearchConfig& search,
                                                  const MomentModel& model,
                                                  const Dataset& data) {
  std::vector<std::array<double, 2>> bounds =
      search.bounds ? *search.bounds : model.default_bounds(data);
  if (static_cast<int>(bounds.size()) != model.p) {
    throw DimensionMismatch("bounds have " + std::to_string(bounds.size()) +
                            " dimensions, model has p = " + std::to_string(model.p));
  }
  for (const auto& b : bounds) {
    if (!std::isfinite(b[0]) || !std::isfinite(b[1]) || b[0] > b[1]) {
      throw UsageError("bad_bounds", "each bound must be a finite [lo, hi] with lo <= hi");
    }
  }
  return bounds;
}

void validate_search(const SearchConfig& search) {
  if (search.grid_points_per_dim < 3 || search.grid_points_per_dim % 2 == 0) {
    throw UsageError("bad_grid", "grid points per dimension must be odd and >= 3");
  }
  if (search.refine_rounds < 0) throw UsageError("bad_grid", "refine rounds must be >= 0");
  if (!(search.refine_shrink > 0.0 && search.refine_shrink < 1.0)) {
    throw UsageError("bad_grid", "refine shrink must lie in (0, 1)");
  }
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw UsageError("bad_quantile", "normal quantile needs p in (0, 1)");
  }
  // Rational initial guess, then one Halley step against erfc for full
  // double accuracy.
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double r = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  } else if (p > 1.0 - plow) {
    const double r = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  } else {
    const double u = p - 0.5;
    const double r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

double profiled_objective(const Eigen::Ref<const Eigen::VectorXd>& theta, const Dataset& data,
                          const MomentModel& model, Gamma gamma, const SolverConfig& solver) {
  BoundModel bound(model, data);
  Eigen::MatrixXd g;
  bound.moments(theta, g);
  InnerSolver inner(solver);
  const MultiplierState st = inner.solve(g, gamma);
  if (!st.converged) return kInf;
  return crpd_divergence(st.weights, gamma);
}

std::size_t tie_break_argmin(const std::vector<double>& values,
                             const std::vector<Eigen::VectorXd>& thetas) {
  if (values.size() != thetas.size()) {
    throw DimensionMismatch("values and thetas differ in length");
  }
  std::size_t best = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    if (best == values.size() || values[i] < values[best] ||
        (values[i] == values[best] && lex_less(thetas[i], thetas[best]))) {
      best = i;
    }
  }
  if (best == values.size()) throw AllInfinite();
  return best;
}

EstimationResult estimate(const Dataset& data, const MomentModel& model, Gamma gamma,
                          const SearchConfig& search, const SolverConfig& solver,
                          double ci_level) {
  validate_search(search);
  if (!(ci_level > 0.0 && ci_level < 1.0)) {
    throw UsageError("bad_ci_level", "confidence level must lie in (0, 1)");
  }
  BoundModel bound(model, data);
  const int p = model.p;
  const int q = model.q;
  const auto original = resolve_bounds(search, model, data);

  const int m = search.grid_points_per_dim;
  InnerSolver inner(solver);
  Eigen::MatrixXd gbuf;
  Eigen::VectorXd theta(p);

  double best_val = kInf;
  Eigen::VectorXd best_theta;
  MultiplierState best_state;
  bool have_best = false;
  long evals = 0;

  MultiplierState warm;
  bool have_warm = false;

  std::vector<std::array<double, 2>> box = original;
  std::vector<std::vector<double>> axes(p);
  std::vector<int> idx(p);

  for (int round = 0; round <= search.refine_rounds; ++round) {
    for (int j = 0; j < p; ++j) {
      axes[j].resize(m);
      const double lo = box[j][0];
      const double step = (box[j][1] - lo) / static_cast<double>(m - 1);
      for (int i = 0; i < m; ++i) axes[j][i] = lo + step * static_cast<double>(i);
    }

    double round_val = kInf;
    Eigen::VectorXd round_theta;
    bool round_has = false;

    // row-major sweep, last dimension fastest
    std::fill(idx.begin(), idx.end(), 0);
    bool done = false;
    while (!done) {
      for (int j = 0; j < p; ++j) theta[j] = axes[j][static_cast<std::size_t>(idx[j])];

      bound.moments(theta, gbuf);
      MultiplierState st = inner.solve(gbuf, gamma, have_warm ? &warm : nullptr);
      if (!st.converged && have_warm) {
        // a stale warm start can sink a feasible point; retry cold before
        // writing the candidate off
        st = inner.solve(gbuf, gamma, nullptr);
      }
      ++evals;
      double val = kInf;
      if (st.converged) {
        val = crpd_divergence(st.weights, gamma);
        warm = st;
        have_warm = true;
      }
      if (std::isfinite(val)) {
        if (!have_best || val < best_val || (val == best_val && lex_less(theta, best_theta))) {
          best_val = val;
          best_theta = theta;
          best_state = st;
          have_best = true;
        }
        if (!round_has || val < round_val || (val == round_val && lex_less(theta, round_theta))) {
          round_val = val;
          round_theta = theta;
          round_has = true;
        }
      }

      int j = p - 1;
      while (j >= 0 && ++idx[j] == m) {
        idx[j] = 0;
        --j;
      }
      done = j < 0;
    }

    if (!have_best) {
      throw AllInfeasible("no feasible grid point: the inner solve failed at all " +
                          std::to_string(evals) + " candidates");
    }

    if (round + 1 <= search.refine_rounds) {
      const Eigen::VectorXd& center = round_has ? round_theta : best_theta;
      for (int j = 0; j < p; ++j) {
        const double half = 0.5 * (box[j][1] - box[j][0]) * search.refine_shrink;
        double lo = center[j] - half;
        double hi = center[j] + half;
        // slide the shrunk box back inside the original bounds
        if (lo < original[j][0]) {
          hi += original[j][0] - lo;
          lo = original[j][0];
        }
        if (hi > original[j][1]) {
          lo -= hi - original[j][1];
          hi = original[j][1];
        }
        lo = std::max(lo, original[j][0]);
        box[j] = {lo, hi};
      }
    }
  }

  EstimationResult result;
  result.theta_hat = best_theta;
  result.objective = best_val;
  result.multipliers = best_state;
  result.gamma = gamma;
  result.objective_evaluations = evals;
  result.ci_level = ci_level;
  result.n = bound.n();

  // covariance at theta_hat: (1/n) (Gbar' Omega^-1 Gbar)^-1
  bound.moments(best_theta, gbuf);
  const double n = static_cast<double>(bound.n());
  Eigen::MatrixXd omega = gbuf.transpose() * gbuf / n;
  Eigen::LDLT<Eigen::MatrixXd> omega_ldlt(omega);
  const double omega_scale = std::max(omega.diagonal().maxCoeff(), 1.0);
  if (omega_ldlt.info() != Eigen::Success ||
      (omega_ldlt.vectorD().array() <= 1e-14 * omega_scale).any()) {
    throw RankDeficient("second-moment matrix of g at theta_hat is not positive definite");
  }
  Eigen::MatrixXd gbar_jac;
  bound.mean_jacobian(best_theta, gbar_jac);
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gbar_jac);
    const double tol = static_cast<double>(q) * svd.singularValues()[0] * 1e-13;
    if (svd.singularValues().minCoeff() <= tol) {
      throw RankDeficient("mean moment Jacobian at theta_hat has column rank < p");
    }
  }
  Eigen::MatrixXd info = gbar_jac.transpose() * omega_ldlt.solve(gbar_jac);
  Eigen::LDLT<Eigen::MatrixXd> info_ldlt(info);
  if (info_ldlt.info() != Eigen::Success ||
      (info_ldlt.vectorD().array() <= 0.0).any()) {
    throw RankDeficient("information matrix at theta_hat is not positive definite");
  }
  Eigen::MatrixXd cov = info_ldlt.solve(Eigen::MatrixXd::Identity(p, p)) / n;
  cov = ((cov + cov.transpose()) * 0.5).eval();
  result.covariance = cov;
  result.std_errors.resize(p);
  for (int j = 0; j < p; ++j) {
    const double v = cov(j, j);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw RankDeficient("negative or non-finite variance for component " + std::to_string(j));
    }
    result.std_errors[j] = std::sqrt(v);
  }
  const double z = normal_quantile(1.0 - (1.0 - ci_level) / 2.0);
  result.confidence_intervals.resize(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    result.confidence_intervals[static_cast<std::size_t>(j)] = {
        best_theta[j] - z * result.std_errors[j], best_theta[j] + z * result.std_errors[j]};
  }
  return result;
}

}  // namespace crpd
