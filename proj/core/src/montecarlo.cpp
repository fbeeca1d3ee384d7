#include "crpd/montecarlo.hpp"

#include <cmath>
#include <limits>

#include "crpd/csv.hpp"
#include "crpd/errors.hpp"
#include "crpd/parallel.hpp"

namespace crpd {

namespace {

double sample_sd(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (const double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
  double acc = 0.0;
  for (const double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

}  // namespace

std::string dgp_label(const DgpSpec& dgp) {
  if (dgp.kind == DgpKind::normal) return "normal";
  return "t" + format_double(dgp.df);
}

Dataset draw_sample(const DgpSpec& dgp, Eigen::Index n, RngStream& stream) {
  if (n < 1) throw DimensionMismatch("sample size must be positive");
  if (dgp.kind == DgpKind::student_t && !(dgp.df > 2.0)) {
    throw UsageError("bad_df", "student t degrees of freedom must exceed 2");
  }
  Dataset data;
  data.columns = {"x"};
  data.values.resize(n, 1);
  if (dgp.kind == DgpKind::normal) {
    for (Eigen::Index i = 0; i < n; ++i) data.values(i, 0) = dgp.mu0 + stream.next_normal();
  } else {
    for (Eigen::Index i = 0; i < n; ++i) data.values(i, 0) = dgp.mu0 + stream.next_student_t(dgp.df);
  }
  return data;
}

Dataset draw_sample(const DgpSpec& dgp, Eigen::Index n, std::uint64_t seed,
                    std::uint64_t replication) {
  RngStream stream(seed, replication);
  return draw_sample(dgp, n, stream);
}

std::vector<double> default_gamma_grid() {
  return {-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0};
}

CellMetrics run_cell(const SimulationConfig& config, double gamma) {
  const Gamma g(gamma);
  const int R = config.replications;
  if (R < 1) throw UsageError("bad_reps", "replication count must be positive");

  struct RepResult {
    bool ok = false;
    double mu = 0.0;
    double se = 0.0;
    bool covered = false;
    Eigen::VectorXd lambda;
    double delta_shift = 0.0;
    WeightSummary weights;
  };
  std::vector<RepResult> reps(static_cast<std::size_t>(R));

  const MomentModel model = central_moments_model();

  parallel_for(static_cast<std::size_t>(R), [&](std::size_t r) {
    RngStream stream(config.seed, static_cast<std::uint64_t>(r));
    const Dataset data = draw_sample(config.dgp, config.n, stream);
    RepResult& out = reps[r];
    try {
      const EstimationResult est =
          estimate(data, model, g, config.search, config.solver, config.ci_level);
      out.mu = est.theta_hat[0];
      out.se = est.std_errors[0];
      out.covered = est.confidence_intervals[0][0] <= config.dgp.mu0 &&
                    config.dgp.mu0 <= est.confidence_intervals[0][1];
      out.lambda = est.multipliers.lambda;
      out.delta_shift = est.multipliers.delta_shift;
      out.weights = weight_summary(est.multipliers.weights);
      out.ok = true;
    } catch (const NumericalError&) {
      out.ok = false;
    }
  });

  CellMetrics cell;
  cell.dgp = config.dgp;
  cell.n = config.n;
  cell.gamma = gamma;
  cell.replications = R;

  std::vector<double> mus, ses, dshifts;
  std::vector<std::array<double, 6>> wstats;
  const int q = model.q;
  std::vector<std::vector<double>> lambdas(static_cast<std::size_t>(q));
  int covered = 0;
  for (const RepResult& rep : reps) {  // replication order: deterministic reduction
    if (!rep.ok) {
      ++cell.failures;
      continue;
    }
    mus.push_back(rep.mu);
    ses.push_back(rep.se);
    dshifts.push_back(rep.delta_shift);
    covered += rep.covered ? 1 : 0;
    for (int j = 0; j < q; ++j) lambdas[static_cast<std::size_t>(j)].push_back(rep.lambda[j]);
    wstats.push_back({rep.weights.min, rep.weights.q1, rep.weights.median, rep.weights.mean,
                      rep.weights.q3, rep.weights.max});
  }
  cell.used = static_cast<int>(mus.size());
  if (cell.used == 0) {
    throw AllInfeasible("every replication failed in cell " + dgp_label(config.dgp) + ", n = " +
                        std::to_string(config.n) + ", gamma = " + format_double(gamma));
  }

  const double mu0 = config.dgp.mu0;
  const double mean_mu = mean_of(mus);
  cell.bias = mean_mu - mu0;
  double mse = 0.0;
  for (const double m : mus) mse += (m - mu0) * (m - mu0);
  cell.mse = mse / static_cast<double>(cell.used);
  const double sd = sample_sd(mus, mean_mu);
  if (cell.used >= 2) cell.empirical_sd = sd;
  cell.mean_se = mean_of(ses);
  if (cell.used >= 2 && cell.mean_se > 0.0) cell.sd_se_ratio = sd / cell.mean_se;
  cell.coverage_distortion =
      static_cast<double>(covered) / static_cast<double>(cell.used) - config.ci_level;

  cell.lambda_mean.resize(q);
  cell.lambda_sd.resize(q);
  for (int j = 0; j < q; ++j) {
    const auto& xs = lambdas[static_cast<std::size_t>(j)];
    const double m = mean_of(xs);
    cell.lambda_mean[j] = m;
    cell.lambda_sd[j] = sample_sd(xs, m);
  }
  cell.delta_shift_mean = mean_of(dshifts);
  cell.delta_shift_sd = sample_sd(dshifts, cell.delta_shift_mean);

  double* mean_fields[6] = {&cell.weight_mean.min, &cell.weight_mean.q1, &cell.weight_mean.median,
                            &cell.weight_mean.mean, &cell.weight_mean.q3, &cell.weight_mean.max};
  double* sd_fields[6] = {&cell.weight_sd.min, &cell.weight_sd.q1, &cell.weight_sd.median,
                          &cell.weight_sd.mean, &cell.weight_sd.q3, &cell.weight_sd.max};
  for (int f = 0; f < 6; ++f) {
    std::vector<double> xs;
    xs.reserve(wstats.size());
    for (const auto& w : wstats) xs.push_back(w[static_cast<std::size_t>(f)]);
    const double m = mean_of(xs);
    *mean_fields[f] = m;
    *sd_fields[f] = sample_sd(xs, m);
  }
  return cell;
}

std::vector<CellMetrics> run_study(const std::vector<SimulationConfig>& configs) {
  std::vector<CellMetrics> cells;
  for (const SimulationConfig& config : configs) {
    for (const double gamma : config.gamma_grid) {
      cells.push_back(run_cell(config, gamma));
    }
  }
  return cells;
}

}  // namespace crpd
