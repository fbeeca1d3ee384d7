#include "crpd/diagnostics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <vector>

#include "crpd/errors.hpp"

namespace crpd {

namespace {

double type7_quantile(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

WeightSummary weight_summary(const Eigen::Ref<const Eigen::VectorXd>& weights) {
  if (weights.size() == 0) throw DimensionMismatch("weight summary of an empty vector");
  std::vector<double> sorted(weights.data(), weights.data() + weights.size());
  std::sort(sorted.begin(), sorted.end());
  WeightSummary s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = type7_quantile(sorted, 0.25);
  s.median = type7_quantile(sorted, 0.5);
  s.q3 = type7_quantile(sorted, 0.75);
  s.mean = weights.mean();
  return s;
}

Eigen::VectorXd b_lambda(const Eigen::Ref<const Eigen::MatrixXd>& g_values, Gamma gamma) {
  const Eigen::Index n = g_values.rows();
  const Eigen::Index q = g_values.cols();
  if (n == 0 || q == 0) throw DimensionMismatch("empty moment matrix");

  const double nd = static_cast<double>(n);
  const Eigen::VectorXd gbar = g_values.colwise().mean();
  const Eigen::MatrixXd omega = g_values.transpose() * g_values / nd;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(omega);
  const double scale = std::max(omega.diagonal().maxCoeff(), 1.0);
  if (ldlt.info() != Eigen::Success ||
      (ldlt.vectorD().array() <= 1e-14 * scale).any()) {
    throw SingularOmega("second-moment matrix is not positive definite");
  }

  const Eigen::VectorXd v = ldlt.solve(std::sqrt(nd) * gbar);
  const Eigen::VectorXd proj = g_values * v;  // v' g_i per row
  Eigen::VectorXd bracket = Eigen::VectorXd::Zero(q);
  for (Eigen::Index i = 0; i < n; ++i) {
    bracket.noalias() += (proj[i] * proj[i]) * g_values.row(i).transpose();
  }
  bracket /= nd;
  const double prefactor = (1.0 - gamma.value()) / 2.0;
  return prefactor * ldlt.solve(bracket);
}

DeltaStatistic delta_statistic(const MultiplierState& state, Eigen::Index n, Gamma gamma) {
  DeltaStatistic out;
  out.raw = static_cast<double>(n) * state.delta_shift;
  if (!gamma.empirical_likelihood()) {
    out.scaled = out.raw / (-(gamma.value() + 1.0) / 2.0);
  }
  return out;
}

SecondOrderReport second_order_report(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                                      const MultiplierState& state, Gamma gamma) {
  SecondOrderReport report;
  report.b_lambda = b_lambda(g_values, gamma);

  const double nd = static_cast<double>(g_values.rows());
  const Eigen::VectorXd gbar = g_values.colwise().mean();
  const Eigen::MatrixXd omega = g_values.transpose() * g_values / nd;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(omega);
  report.lambda_first_order = ldlt.solve(gbar);

  report.delta_stat = delta_statistic(state, g_values.rows(), gamma);
  report.weights = weight_summary(state.weights);
  return report;
}

}  // namespace crpd
