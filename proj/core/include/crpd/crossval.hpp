#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "crpd/estimator.hpp"
#include "crpd/moment_model.hpp"

namespace crpd {

enum class CvLoss {
  moment_instability,  // squared norm of the validation moment mean at the training fit
  prediction_mse,      // mean squared error of the outcome column around theta_hat[0]
};

const char* cv_loss_name(CvLoss loss);

struct CvConfig {
  std::vector<double> gamma_grid;  // required, finite, non-empty
  int folds = 5;
  CvLoss loss = CvLoss::moment_instability;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

struct CvReport {
  std::vector<double> gamma_grid;
  std::vector<double> mean_loss;      // NaN when every fold failed at that gamma
  std::vector<int> failed_folds;      // per gamma
  std::vector<int> fold_assignments;  // observation -> fold
  double selected_gamma = 0.0;
  EstimationResult refit;             // full-sample fit at selected_gamma
};

// Fold label per observation: a seeded shuffle of the observation order
// followed by contiguous block assignment, so fold sizes differ by at most
// one (the first n % k folds get the extra observation). shuffle = false
// keeps the original order. Throws BadFoldCount unless 2 <= k <= n.
std::vector<int> kfold_partition(Eigen::Index n, int k, std::uint64_t seed, bool shuffle);

// Inclusive arithmetic grid lo, lo + step, ..., hi.
std::vector<double> gamma_grid(double lo, double hi, double step);

double cv_loss_moment_instability(const Eigen::Ref<const Eigen::MatrixXd>& validation_g);
double cv_loss_prediction_mse(const Eigen::Ref<const Eigen::VectorXd>& outcomes,
                              double theta_first);

// K-fold selection of gamma: for every grid value, fit each training fold
// and score the held-out fold; gammas with any failed fold are excluded;
// the smallest mean loss wins, ties resolving to the smallest |gamma| and
// then the smallest gamma. Refits the winner on the full sample. Throws
// AllGammaFailed when no gamma completes every fold, NotApplicable when the
// prediction loss is requested for a model without a scalar outcome.
CvReport select_gamma(const Dataset& data, const MomentModel& model, const CvConfig& cv,
                      const SearchConfig& search = {}, const SolverConfig& solver = {});

}  // namespace crpd
