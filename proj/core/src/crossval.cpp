#include "crpd/crossval.hpp"

#include <cmath>
#include <limits>

#include "crpd/errors.hpp"
#include "crpd/parallel.hpp"
#include "crpd/rng.hpp"

namespace crpd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// n x q moment matrix without the estimation-side n >= q + 1 requirement;
// validation folds may be smaller than that.
Eigen::MatrixXd moments_of(const MomentModel& model, const Dataset& data,
                           const Eigen::VectorXd& theta) {
  const Eigen::Index n = data.n();
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(model.inputs.size()));
  for (std::size_t k = 0; k < model.inputs.size(); ++k) {
    const Eigen::Index j = data.column_index(model.inputs[k]);
    if (j < 0) throw MissingColumn(model.inputs[k]);
    z.col(static_cast<Eigen::Index>(k)) = data.values.col(j);
  }
  Eigen::MatrixXd g(n, model.q);
  double zbuf[32], gbuf[32];
  const std::span<const double> th(theta.data(), static_cast<std::size_t>(theta.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < z.cols(); ++k) zbuf[k] = z(i, k);
    model.eval(std::span<const double>(zbuf, static_cast<std::size_t>(z.cols())), th,
               std::span<double>(gbuf, static_cast<std::size_t>(model.q)));
    for (int j = 0; j < model.q; ++j) g(i, j) = gbuf[j];
  }
  return g;
}

}  // namespace

const char* cv_loss_name(CvLoss loss) {
  return loss == CvLoss::prediction_mse ? "prediction-mse" : "moment-instability";
}

std::vector<int> kfold_partition(Eigen::Index n, int k, std::uint64_t seed, bool shuffle) {
  if (k < 2 || static_cast<Eigen::Index>(k) > n) throw BadFoldCount(k, n);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  if (shuffle) {
    RngStream stream(seed, 0);
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const Eigen::Index j =
          static_cast<Eigen::Index>(stream.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
  }

  const Eigen::Index base = n / k;
  const Eigen::Index extra = n % k;  // first `extra` folds get base + 1
  std::vector<int> fold(static_cast<std::size_t>(n));
  Eigen::Index pos = 0;
  for (int f = 0; f < k; ++f) {
    const Eigen::Index size = base + (static_cast<Eigen::Index>(f) < extra ? 1 : 0);
    for (Eigen::Index i = 0; i < size; ++i) {
      fold[static_cast<std::size_t>(order[static_cast<std::size_t>(pos++)])] = f;
    }
  }
  return fold;
}

std::vector<double> gamma_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw UsageError("bad_grid", "grid needs finite lo <= hi and step > 0");
  }
  const double span = (hi - lo) / step;
  const long count = std::lround(span) + 1;
  if (count < 1 || std::fabs(lo + static_cast<double>(count - 1) * step - hi) >
                       1e-6 * std::max(1.0, std::fabs(hi))) {
    throw UsageError("bad_grid", "step does not evenly divide the grid span");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = lo + static_cast<double>(i) * step;
  return grid;
}

double cv_loss_moment_instability(const Eigen::Ref<const Eigen::MatrixXd>& validation_g) {
  if (validation_g.rows() == 0) throw DimensionMismatch("empty validation moment matrix");
  return validation_g.colwise().mean().squaredNorm();
}

double cv_loss_prediction_mse(const Eigen::Ref<const Eigen::VectorXd>& outcomes,
                              double theta_first) {
  if (outcomes.size() == 0) throw DimensionMismatch("empty validation outcome vector");
  return (outcomes.array() - theta_first).square().mean();
}

CvReport select_gamma(const Dataset& data, const MomentModel& model, const CvConfig& cv,
                      const SearchConfig& search, const SolverConfig& solver) {
  if (cv.gamma_grid.empty()) throw UsageError("bad_grid", "gamma grid is empty");
  for (const double g : cv.gamma_grid) {
    if (!std::isfinite(g)) throw UsageError("bad_grid", "gamma grid entries must be finite");
  }
  if (cv.loss == CvLoss::prediction_mse && (model.p != 1 || model.outcome.empty())) {
    throw NotApplicable("prediction loss needs a scalar-mean model with an outcome column");
  }

  const Eigen::Index n = data.n();
  const std::vector<int> fold = kfold_partition(n, cv.folds, cv.seed, cv.shuffle);

  std::vector<std::vector<Eigen::Index>> train_rows(static_cast<std::size_t>(cv.folds));
  std::vector<std::vector<Eigen::Index>> val_rows(static_cast<std::size_t>(cv.folds));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto f = static_cast<std::size_t>(fold[static_cast<std::size_t>(i)]);
    val_rows[f].push_back(i);
    for (std::size_t other = 0; other < static_cast<std::size_t>(cv.folds); ++other) {
      if (other != f) train_rows[other].push_back(i);
    }
  }

  const std::size_t n_gamma = cv.gamma_grid.size();
  const std::size_t n_items = n_gamma * static_cast<std::size_t>(cv.folds);
  std::vector<double> item_loss(n_items, kNaN);
  std::vector<char> item_failed(n_items, 0);

  parallel_for(n_items, [&](std::size_t item) {
    const std::size_t gi = item / static_cast<std::size_t>(cv.folds);
    const std::size_t k = item % static_cast<std::size_t>(cv.folds);
    const Gamma gamma(cv.gamma_grid[gi]);
    const Dataset train = data.subset_rows(train_rows[k]);
    const Dataset val = data.subset_rows(val_rows[k]);
    try {
      const EstimationResult fit = estimate(train, model, gamma, search, solver);
      if (cv.loss == CvLoss::prediction_mse) {
        const Eigen::Index j = val.column_index(model.outcome);
        if (j < 0) throw MissingColumn(model.outcome);
        item_loss[item] = cv_loss_prediction_mse(val.values.col(j), fit.theta_hat[0]);
      } else {
        const Eigen::MatrixXd g_val = moments_of(model, val, fit.theta_hat);
        item_loss[item] = cv_loss_moment_instability(g_val);
      }
    } catch (const NumericalError&) {
      item_failed[item] = 1;
    }
  });

  CvReport report;
  report.gamma_grid = cv.gamma_grid;
  report.mean_loss.assign(n_gamma, kNaN);
  report.failed_folds.assign(n_gamma, 0);
  report.fold_assignments = fold;

  bool any = false;
  std::size_t best = 0;
  for (std::size_t gi = 0; gi < n_gamma; ++gi) {
    double sum = 0.0;
    int completed = 0;
    int failed = 0;
    for (int k = 0; k < cv.folds; ++k) {
      const std::size_t item = gi * static_cast<std::size_t>(cv.folds) + static_cast<std::size_t>(k);
      if (item_failed[item]) {
        ++failed;
      } else {
        sum += item_loss[item];
        ++completed;
      }
    }
    report.failed_folds[gi] = failed;
    if (completed > 0) report.mean_loss[gi] = sum / completed;
    if (failed > 0) continue;

    if (!any) {
      any = true;
      best = gi;
      continue;
    }
    const double cand = report.mean_loss[gi];
    const double incumbent = report.mean_loss[best];
    const double g_cand = cv.gamma_grid[gi];
    const double g_best = cv.gamma_grid[best];
    if (cand < incumbent ||
        (cand == incumbent && (std::fabs(g_cand) < std::fabs(g_best) ||
                               (std::fabs(g_cand) == std::fabs(g_best) && g_cand < g_best)))) {
      best = gi;
    }
  }
  if (!any) throw AllGammaFailed();

  report.selected_gamma = cv.gamma_grid[best];
  report.refit = estimate(data, model, Gamma(report.selected_gamma), search, solver);
  return report;
}

}  // namespace crpd
