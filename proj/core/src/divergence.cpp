#include "crpd/divergence.hpp"

#include <cmath>

#include "crpd/errors.hpp"

namespace crpd {

double crpd_divergence(const Eigen::Ref<const Eigen::VectorXd>& pi, Gamma gamma) {
  const Eigen::Index n = pi.size();
  if (n == 0) throw DimensionMismatch("divergence of an empty weight vector");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(pi[i] > 0.0) || !std::isfinite(pi[i])) {
      throw NonPositiveWeight(static_cast<std::size_t>(i), pi[i]);
    }
  }

  const double nd = static_cast<double>(n);
  double acc = 0.0;
  switch (gamma.branch()) {
    case GammaBranch::exponential_tilting:
      for (Eigen::Index i = 0; i < n; ++i) acc += pi[i] * std::log(nd * pi[i]);
      return acc;
    case GammaBranch::empirical_likelihood:
      for (Eigen::Index i = 0; i < n; ++i) acc += std::log(nd * pi[i]);
      return -acc / nd;
    case GammaBranch::generic:
    default: {
      const double g = gamma.value();
      // expm1 keeps the (n pi)^gamma - 1 difference accurate near the
      // branch boundaries, where gamma * log(n pi) is tiny.
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += pi[i] * std::expm1(g * std::log(nd * pi[i]));
      }
      return acc / (g * (g + 1.0));
    }
  }
}

Eigen::VectorXd index_argument(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                               const Eigen::Ref<const Eigen::VectorXd>& lambda,
                               double delta_shift) {
  if (g_values.cols() != lambda.size()) {
    throw DimensionMismatch("moment matrix has " + std::to_string(g_values.cols()) +
                            " columns but lambda has " + std::to_string(lambda.size()) +
                            " entries");
  }
  return ((g_values * lambda).array() + delta_shift).matrix();
}

Eigen::VectorXd implied_weights_shifted(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                                        const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                        double delta_shift, Gamma gamma, double kappa_pos) {
  const Eigen::Index n = g_values.rows();
  if (n == 0) throw DimensionMismatch("empty moment matrix");
  Eigen::VectorXd t = index_argument(g_values, lambda, delta_shift);
  Eigen::VectorXd pi(n);
  const double inv_n = 1.0 / static_cast<double>(n);

  switch (gamma.branch()) {
    case GammaBranch::exponential_tilting:
      for (Eigen::Index i = 0; i < n; ++i) pi[i] = std::exp(-t[i]) * inv_n;
      return pi;
    case GammaBranch::empirical_likelihood:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u = 1.0 + t[i];
        if (!(u >= kappa_pos)) throw InfeasibleIndex(static_cast<std::size_t>(i), u);
        pi[i] = inv_n / u;
      }
      return pi;
    case GammaBranch::generic:
    default: {
      const double g = gamma.value();
      const double inv_g = 1.0 / g;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double s = 1.0 - g * t[i];
        if (!(s >= kappa_pos)) throw InfeasibleIndex(static_cast<std::size_t>(i), s);
        pi[i] = std::pow(s, inv_g) * inv_n;
      }
      return pi;
    }
  }
}

Eigen::VectorXd implied_weights(const Eigen::Ref<const Eigen::MatrixXd>& g_values,
                                const Eigen::Ref<const Eigen::VectorXd>& lambda, double delta,
                                Gamma gamma, double kappa_pos) {
  const DeltaPopulation ref = delta_population(gamma);
  if (ref.el_degenerate) throw ElBranchDegenerate();
  return implied_weights_shifted(g_values, lambda, delta - ref.value, gamma, kappa_pos);
}

DeltaPopulation delta_population(Gamma gamma) {
  if (gamma.empirical_likelihood()) return {0.0, true};
  return {-1.0 / (gamma.value() + 1.0), false};
}

}  // namespace crpd
