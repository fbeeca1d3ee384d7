#include "crpd/moment_model.hpp"

#include <cmath>
#include <stdexcept>

#include "crpd/errors.hpp"

namespace crpd {

namespace {

struct SampleStats {
  double mean = 0.0;
  double sd = 0.0;
  double variance = 0.0;
  Eigen::Index n = 0;
};

SampleStats column_stats(const Dataset& data, const std::string& column) {
  const Eigen::Index j = data.column_index(column);
  if (j < 0) throw MissingColumn(column);
  SampleStats s;
  s.n = data.n();
  if (s.n == 0) return s;
  const auto col = data.values.col(j);
  s.mean = col.mean();
  if (s.n > 1) {
    s.variance = (col.array() - s.mean).square().sum() / static_cast<double>(s.n - 1);
    s.sd = std::sqrt(s.variance);
  }
  return s;
}

std::vector<std::array<double, 2>> mean_box(const Dataset& data, const std::string& column) {
  const SampleStats s = column_stats(data, column);
  const double half = 6.0 * s.sd / std::sqrt(static_cast<double>(s.n));
  return {{{s.mean - half, s.mean + half}}};
}

}  // namespace

MomentModel central_moments_model() {
  MomentModel m;
  m.name = "central-moments";
  m.p = 2;
  m.q = 3;
  m.inputs = {"x"};
  m.outcome = "x";
  m.eval = [](std::span<const double> z, std::span<const double> theta, std::span<double> g) {
    const double e = z[0] - theta[0];
    g[0] = e;
    g[1] = e * e - theta[1];
    g[2] = e * e * e;
  };
  m.jacobian = [](std::span<const double> z, std::span<const double> theta,
                  std::span<double> jac) {
    const double e = z[0] - theta[0];
    // column-major 3x2: d/dmu then d/dsigma2
    jac[0] = -1.0;
    jac[1] = -2.0 * e;
    jac[2] = -3.0 * e * e;
    jac[3] = 0.0;
    jac[4] = -1.0;
    jac[5] = 0.0;
  };
  m.default_bounds = [](const Dataset& data) {
    const SampleStats s = column_stats(data, "x");
    const double half = 6.0 * s.sd / std::sqrt(static_cast<double>(s.n));
    return std::vector<std::array<double, 2>>{{{s.mean - half, s.mean + half}},
                                              {{0.2 * s.variance, 5.0 * s.variance}}};
  };
  return m;
}

MomentModel instrumented_mean_model() {
  MomentModel m;
  m.name = "instrumented-mean";
  m.p = 1;
  m.q = 2;
  m.inputs = {"mpd", "days"};
  m.outcome = "mpd";
  m.eval = [](std::span<const double> z, std::span<const double> theta, std::span<double> g) {
    const double e = z[0] - theta[0];
    g[0] = e;
    g[1] = e * z[1];
  };
  m.jacobian = [](std::span<const double> z, std::span<const double>, std::span<double> jac) {
    jac[0] = -1.0;
    jac[1] = -z[1];
  };
  m.default_bounds = [](const Dataset& data) { return mean_box(data, "mpd"); };
  return m;
}

MomentModel mean_only_model() {
  MomentModel m;
  m.name = "mean-only";
  m.p = 1;
  m.q = 1;
  m.inputs = {"x"};
  m.outcome = "x";
  m.eval = [](std::span<const double> z, std::span<const double> theta, std::span<double> g) {
    g[0] = z[0] - theta[0];
  };
  m.jacobian = [](std::span<const double>, std::span<const double>, std::span<double> jac) {
    jac[0] = -1.0;
  };
  m.default_bounds = [](const Dataset& data) { return mean_box(data, "x"); };
  return m;
}

MomentModel linear_instrument_model(const std::string& outcome, const MomentRecipe& recipe) {
  if (outcome.empty()) throw DimensionMismatch("linear-instrument model needs an outcome column");
  if (recipe.product && recipe.instruments.empty()) {
    throw DimensionMismatch("product recipe needs at least one instrument column");
  }
  const int q = (recipe.level ? 1 : 0) + (recipe.square ? 1 : 0) + (recipe.cube ? 1 : 0) +
                (recipe.product ? static_cast<int>(recipe.instruments.size()) : 0);
  const int p = 1 + (recipe.square ? 1 : 0);
  if (q < p) {
    throw DimensionMismatch("moment recipe yields q = " + std::to_string(q) +
                            " < p = " + std::to_string(p));
  }

  MomentModel m;
  m.name = "linear-instrument";
  m.p = p;
  m.q = q;
  m.inputs = {outcome};
  if (recipe.product) {
    for (const auto& w : recipe.instruments) m.inputs.push_back(w);
  }
  m.outcome = outcome;

  const MomentRecipe r = recipe;
  m.eval = [r](std::span<const double> z, std::span<const double> theta, std::span<double> g) {
    const double e = z[0] - theta[0];
    std::size_t k = 0;
    if (r.level) g[k++] = e;
    if (r.square) g[k++] = e * e - theta[1];
    if (r.cube) g[k++] = e * e * e;
    if (r.product) {
      for (std::size_t j = 0; j < r.instruments.size(); ++j) g[k++] = e * z[1 + j];
    }
  };
  m.jacobian = [r, q](std::span<const double> z, std::span<const double> theta,
                      std::span<double> jac) {
    const double e = z[0] - theta[0];
    std::size_t k = 0;
    std::size_t square_row = 0;
    if (r.level) jac[k++] = -1.0;
    if (r.square) {
      square_row = k;
      jac[k++] = -2.0 * e;
    }
    if (r.cube) jac[k++] = -3.0 * e * e;
    if (r.product) {
      for (std::size_t j = 0; j < r.instruments.size(); ++j) jac[k++] = -z[1 + j];
    }
    if (r.square) {
      const std::size_t qs = static_cast<std::size_t>(q);
      for (std::size_t i = 0; i < qs; ++i) jac[qs + i] = 0.0;
      jac[qs + square_row] = -1.0;
    }
  };
  m.default_bounds = [outcome, r](const Dataset& data) {
    const Eigen::Index j = data.column_index(outcome);
    if (j < 0) throw MissingColumn(outcome);
    const auto col = data.values.col(j);
    const double mean = col.mean();
    double variance = 0.0;
    if (data.n() > 1) {
      variance = (col.array() - mean).square().sum() / static_cast<double>(data.n() - 1);
    }
    const double half = 6.0 * std::sqrt(variance / static_cast<double>(data.n()));
    std::vector<std::array<double, 2>> out{{{mean - half, mean + half}}};
    if (r.square) out.push_back({0.2 * variance, 5.0 * variance});
    return out;
  };
  return m;
}

BoundModel::BoundModel(const MomentModel& model, const Dataset& data) : model_(model) {
  if (model.p < 1 || model.q < model.p) {
    throw DimensionMismatch("model '" + model.name + "' has invalid dimensions p = " +
                            std::to_string(model.p) + ", q = " + std::to_string(model.q));
  }
  const Eigen::Index n = data.n();
  if (n < model.q + 1) {
    throw DimensionMismatch("need n >= q + 1 observations, got n = " + std::to_string(n) +
                            " with q = " + std::to_string(model.q));
  }
  inputs_.resize(n, static_cast<Eigen::Index>(model.inputs.size()));
  for (std::size_t k = 0; k < model.inputs.size(); ++k) {
    const Eigen::Index j = data.column_index(model.inputs[k]);
    if (j < 0) throw MissingColumn(model.inputs[k]);
    inputs_.col(static_cast<Eigen::Index>(k)) = data.values.col(j);
    if (model.inputs[k] == model.outcome) outcome_col_ = static_cast<Eigen::Index>(k);
  }
  if (!inputs_.allFinite()) {
    throw DataError("non_finite", "dataset contains non-finite entries");
  }
}

void BoundModel::moments(const Eigen::Ref<const Eigen::VectorXd>& theta,
                         Eigen::MatrixXd& g_out) const {
  if (theta.size() != model_.p) {
    throw DimensionMismatch("theta has " + std::to_string(theta.size()) + " entries, expected " +
                            std::to_string(model_.p));
  }
  const Eigen::Index n = inputs_.rows();
  const int q = model_.q;
  g_out.resize(n, q);
  double gbuf[32];
  const std::span<const double> th(theta.data(), static_cast<std::size_t>(theta.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::span<const double> z(inputs_.row(i).data(),
                                    static_cast<std::size_t>(inputs_.cols()));
    model_.eval(z, th, std::span<double>(gbuf, static_cast<std::size_t>(q)));
    for (int j = 0; j < q; ++j) g_out(i, j) = gbuf[j];
  }
}

void BoundModel::mean_jacobian(const Eigen::Ref<const Eigen::VectorXd>& theta,
                               Eigen::MatrixXd& jac_out) const {
  if (theta.size() != model_.p) {
    throw DimensionMismatch("theta has " + std::to_string(theta.size()) + " entries, expected " +
                            std::to_string(model_.p));
  }
  const Eigen::Index n = inputs_.rows();
  const int q = model_.q;
  const int p = model_.p;
  jac_out.setZero(q, p);
  double jbuf[64];
  const std::span<const double> th(theta.data(), static_cast<std::size_t>(theta.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::span<const double> z(inputs_.row(i).data(),
                                    static_cast<std::size_t>(inputs_.cols()));
    model_.jacobian(z, th, std::span<double>(jbuf, static_cast<std::size_t>(q * p)));
    for (int c = 0; c < p; ++c) {
      for (int r = 0; r < q; ++r) jac_out(r, c) += jbuf[c * q + r];
    }
  }
  jac_out /= static_cast<double>(n);
}

Eigen::VectorXd BoundModel::outcome_values() const {
  if (outcome_col_ < 0) {
    throw NotApplicable("model '" + model_.name + "' declares no outcome column");
  }
  return inputs_.col(outcome_col_);
}

}  // namespace crpd
