#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crpd {

// Column-named numeric table. Rows are observations.
struct Dataset {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // n x columns.size()

  Eigen::Index n() const { return values.rows(); }

  // -1 when the column is absent.
  Eigen::Index column_index(std::string_view name) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j] == name) return static_cast<Eigen::Index>(j);
    }
    return -1;
  }

  Dataset subset_rows(const std::vector<Eigen::Index>& rows) const {
    Dataset out;
    out.columns = columns;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.values.row(static_cast<Eigen::Index>(i)) = values.row(rows[i]);
    }
    return out;
  }
};

// A moment specification E[g(Z, theta)] = 0 with q moment components and a
// p-dimensional parameter. eval and jacobian act on one observation: z holds
// the values of `inputs` in declaration order, jac is column-major q x p.
// Models are immutable after construction and eval/jacobian are pure.
struct MomentModel {
  std::string name;
  int p = 0;
  int q = 0;
  std::vector<std::string> inputs;
  std::string outcome;  // column predicted by theta[0]; empty when none
  std::function<void(std::span<const double> z, std::span<const double> theta,
                     std::span<double> g)>
      eval;
  std::function<void(std::span<const double> z, std::span<const double> theta,
                     std::span<double> jac)>
      jacobian;
  std::function<std::vector<std::array<double, 2>>(const Dataset&)> default_bounds;
};

// theta = (mu, sigma2), moments (x - mu, (x - mu)^2 - sigma2, (x - mu)^3).
// Default box: mu in mean +- 6 sd/sqrt(n), sigma2 in variance * [0.2, 5].
MomentModel central_moments_model();

// theta = (mu), moments (x - mu, (x - mu) * d) on columns (mpd, days).
MomentModel instrumented_mean_model();

// theta = (mu), single moment (x - mu). Just identified.
MomentModel mean_only_model();

// Configurable model on an outcome column y: moment recipe entries
//   level:   y - mu
//   square:  (y - mu)^2 - sigma2   (adds sigma2 to theta)
//   cube:    (y - mu)^3
//   product: (y - mu) * w_j for each instrument column w_j
struct MomentRecipe {
  bool level = true;
  bool square = false;
  bool cube = false;
  bool product = false;
  std::vector<std::string> instruments;
};

MomentModel linear_instrument_model(const std::string& outcome, const MomentRecipe& recipe);

// A model resolved against a concrete dataset: column lookups are done once
// and the per-observation inputs are packed contiguously.
class BoundModel {
 public:
  // Throws MissingColumn for unresolved inputs, DimensionMismatch when
  // n < q + 1, DataError on non-finite entries.
  BoundModel(const MomentModel& model, const Dataset& data);

  const MomentModel& model() const noexcept { return model_; }
  Eigen::Index n() const noexcept { return inputs_.rows(); }

  // n x q moment matrix at theta.
  void moments(const Eigen::Ref<const Eigen::VectorXd>& theta, Eigen::MatrixXd& g_out) const;

  // q x p sample-average parameter Jacobian at theta.
  void mean_jacobian(const Eigen::Ref<const Eigen::VectorXd>& theta,
                     Eigen::MatrixXd& jac_out) const;

  // Values of the model's outcome column; throws NotApplicable when the
  // model declares none.
  Eigen::VectorXd outcome_values() const;

 private:
  MomentModel model_;  // owned copy; binding a temporary model is fine
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> inputs_;
  Eigen::Index outcome_col_ = -1;  // index into inputs_
};

}  // namespace crpd
