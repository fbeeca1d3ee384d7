// Command-line front end: estimate | crossval | simulate.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
// Errors print one line to stderr: "error: <category>/<code>: <message>".

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "crpd/crossval.hpp"
#include "crpd/csv.hpp"
#include "crpd/diagnostics.hpp"
#include "crpd/errors.hpp"
#include "crpd/estimator.hpp"
#include "crpd/montecarlo.hpp"

using nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

// The CLI resolves estimates on a finer grid than the library default so
// that reported point estimates are stable to ~1e-4.
crpd::SearchConfig cli_search_config() {
  crpd::SearchConfig s;
  s.refine_rounds = 6;
  return s;
}

std::vector<double> parse_gamma_grid(const std::string& text) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !in.eof()) {
    throw crpd::UsageError("bad_grid", "grid must be lo:hi:step, got '" + text + "'");
  }
  return crpd::gamma_grid(lo, hi, step);
}

std::vector<std::array<double, 2>> parse_bounds(const std::string& text) {
  std::vector<std::array<double, 2>> out;
  std::istringstream list(text);
  std::string item;
  while (std::getline(list, item, ',')) {
    double lo = 0.0, hi = 0.0;
    char c = 0;
    std::istringstream in(item);
    if (!(in >> lo >> c >> hi) || c != ':' || !in.eof() || !(lo < hi)) {
      throw crpd::UsageError("bad_bounds",
                             "bounds must be lo:hi[,lo:hi...] with lo < hi, got '" + text + "'");
    }
    out.push_back({lo, hi});
  }
  if (out.empty()) throw crpd::UsageError("bad_bounds", "empty bounds specification");
  return out;
}

crpd::MomentModel make_model(const std::string& name, const std::string& outcome,
                             const std::vector<std::string>& instruments) {
  const bool custom = !outcome.empty() || !instruments.empty();
  if (name == "mean-only") {
    if (!instruments.empty()) {
      throw crpd::UsageError("bad_model", "mean-only takes no instrument columns");
    }
    if (custom) {
      crpd::MomentRecipe r;
      auto m = crpd::linear_instrument_model(outcome, r);
      m.name = name;
      return m;
    }
    return crpd::mean_only_model();
  }
  if (name == "central-moments") {
    if (!instruments.empty()) {
      throw crpd::UsageError("bad_model", "central-moments takes no instrument columns");
    }
    if (custom) {
      crpd::MomentRecipe r;
      r.square = true;
      r.cube = true;
      auto m = crpd::linear_instrument_model(outcome, r);
      m.name = name;
      return m;
    }
    return crpd::central_moments_model();
  }
  if (name == "instrumented-mean") {
    if (custom) {
      if (outcome.empty() || instruments.empty()) {
        throw crpd::UsageError("bad_model",
                               "instrumented-mean needs --outcome and --instruments together");
      }
      crpd::MomentRecipe r;
      r.product = true;
      r.instruments = instruments;
      auto m = crpd::linear_instrument_model(outcome, r);
      m.name = name;
      return m;
    }
    return crpd::instrumented_mean_model();
  }
  throw crpd::UsageError("bad_model", "unknown model '" + name +
                                          "' (expected mean-only, instrumented-mean, "
                                          "or central-moments)");
}

ordered_json json_vector(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

ordered_json estimate_body(const crpd::EstimationResult& r, const std::string& model_name,
                           bool include_weights) {
  ordered_json doc;
  doc["model"] = model_name;
  doc["gamma"] = r.gamma.value();
  doc["n"] = static_cast<long>(r.n);
  doc["objective"] = r.objective;
  doc["theta_hat"] = json_vector(r.theta_hat);
  doc["std_errors"] = json_vector(r.std_errors);
  ordered_json cis = ordered_json::array();
  for (const auto& ci : r.confidence_intervals) cis.push_back({ci[0], ci[1]});
  doc["confidence_intervals"] = cis;
  doc["ci_level"] = r.ci_level;
  doc["lambda"] = json_vector(r.multipliers.lambda);
  doc["delta_shift"] = r.multipliers.delta_shift;
  const double n = static_cast<double>(r.n);
  const Eigen::VectorXd relative = r.multipliers.weights * n;
  const crpd::WeightSummary ws = crpd::weight_summary(relative);
  doc["weight_summary"] = {{"min", ws.min}, {"q1", ws.q1},     {"median", ws.median},
                           {"mean", ws.mean}, {"q3", ws.q3},   {"max", ws.max}};
  doc["solver"] = {{"iterations", r.multipliers.iterations},
                   {"residual_norm", r.multipliers.residual_norm},
                   {"objective_evaluations", r.objective_evaluations}};
  if (include_weights) doc["weights"] = json_vector(relative);
  return doc;
}

void write_estimate_csv(std::ostream& out, const crpd::EstimationResult& r,
                        const std::string& model_name) {
  out << "model,gamma,n,objective,delta_shift,parameter,estimate,std_error,ci_low,ci_high\n";
  for (Eigen::Index j = 0; j < r.theta_hat.size(); ++j) {
    out << model_name << ',' << crpd::format_double(r.gamma.value()) << ',' << r.n << ','
        << crpd::format_double(r.objective) << ','
        << crpd::format_double(r.multipliers.delta_shift) << ",theta_" << (j + 1) << ','
        << crpd::format_double(r.theta_hat[j]) << ',' << crpd::format_double(r.std_errors[j])
        << ',' << crpd::format_double(r.confidence_intervals[static_cast<std::size_t>(j)][0])
        << ',' << crpd::format_double(r.confidence_intervals[static_cast<std::size_t>(j)][1])
        << '\n';
  }
}

std::string dgp_cli_label(const crpd::DgpSpec& dgp) { return crpd::dgp_label(dgp); }

// Shared output plumbing: --output writes to a file (opened before any work
// starts), otherwise stdout.
class OutputSink {
 public:
  explicit OutputSink(const std::string& path) : path_(path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw crpd::UsageError("bad_output", "cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  void finish() {
    stream().flush();
    if (!path_.empty() && !file_) {
      throw crpd::DataError("write_failed", "writing '" + path_ + "' failed");
    }
  }

 private:
  std::string path_;
  std::ofstream file_;
};

void require_readable(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw crpd::DataError("unreadable_input", "cannot read input file '" + path + "'");
}

struct CommonOpts {
  std::string input;
  std::string output;
  std::string format;
  std::string model = "instrumented-mean";
  std::string outcome;
  std::vector<std::string> instruments;
  std::string bounds;
  double ci_level = 0.95;
};

void validate_ci_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw crpd::UsageError("bad_ci_level", "ci level must lie strictly between 0 and 1");
  }
}

crpd::SearchConfig search_for(const CommonOpts& opts, const crpd::MomentModel& model) {
  crpd::SearchConfig search = cli_search_config();
  if (!opts.bounds.empty()) {
    auto box = parse_bounds(opts.bounds);
    if (static_cast<int>(box.size()) != model.p) {
      throw crpd::DimensionMismatch("--bounds gives " + std::to_string(box.size()) +
                                    " ranges for a " + std::to_string(model.p) +
                                    "-parameter model");
    }
    search.bounds = std::move(box);
  }
  return search;
}

int run_estimate(const CommonOpts& opts, double gamma_value, bool include_weights) {
  if (!std::isfinite(gamma_value)) throw crpd::UsageError("bad_gamma", "gamma must be finite");
  validate_ci_level(opts.ci_level);
  const crpd::MomentModel model = make_model(opts.model, opts.outcome, opts.instruments);
  require_readable(opts.input);
  OutputSink sink(opts.output);

  const crpd::Dataset data = crpd::parse_csv(opts.input);
  const auto result = crpd::estimate(data, model, crpd::Gamma(gamma_value),
                                     search_for(opts, model), {}, opts.ci_level);

  if (opts.format == "csv") {
    write_estimate_csv(sink.stream(), result, opts.model);
  } else {
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "estimate";
    doc.update(estimate_body(result, opts.model, include_weights));
    sink.stream() << doc.dump(2) << '\n';
  }
  sink.finish();
  return 0;
}

int run_crossval(const CommonOpts& opts, const std::string& grid_text, int folds,
                 const std::string& loss_name, std::uint64_t seed, bool no_shuffle) {
  validate_ci_level(opts.ci_level);
  crpd::CvConfig cv;
  cv.gamma_grid = parse_gamma_grid(grid_text);
  cv.folds = folds;
  cv.seed = seed;
  cv.shuffle = !no_shuffle;
  if (loss_name == "moment-instability") {
    cv.loss = crpd::CvLoss::moment_instability;
  } else if (loss_name == "prediction-mse") {
    cv.loss = crpd::CvLoss::prediction_mse;
  } else {
    throw crpd::UsageError("bad_loss", "unknown loss '" + loss_name +
                                           "' (expected moment-instability or prediction-mse)");
  }
  const crpd::MomentModel model = make_model(opts.model, opts.outcome, opts.instruments);
  require_readable(opts.input);
  OutputSink sink(opts.output);

  const crpd::Dataset data = crpd::parse_csv(opts.input);
  const auto report =
      crpd::select_gamma(data, model, cv, search_for(opts, model), {});

  if (opts.format == "json") {
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "crossval";
    doc["model"] = opts.model;
    doc["loss"] = loss_name;
    doc["folds"] = folds;
    doc["seed"] = seed;
    doc["shuffle"] = cv.shuffle;
    doc["gamma_grid"] = report.gamma_grid;
    doc["mean_loss"] = report.mean_loss;
    doc["failed_folds"] = report.failed_folds;
    doc["fold_assignments"] = report.fold_assignments;
    doc["selected_gamma"] = report.selected_gamma;
    doc["refit"] = estimate_body(report.refit, opts.model, false);
    sink.stream() << doc.dump(2) << '\n';
  } else {
    auto& out = sink.stream();
    out << "gamma,mean_loss,failed_folds\n";
    for (std::size_t i = 0; i < report.gamma_grid.size(); ++i) {
      out << crpd::format_double(report.gamma_grid[i]) << ','
          << crpd::format_double(report.mean_loss[i]) << ',' << report.failed_folds[i] << '\n';
    }
    out << "\nselected_gamma," << crpd::format_double(report.selected_gamma) << "\n\n";
    write_estimate_csv(out, report.refit, opts.model);
  }
  sink.finish();
  return 0;
}

int run_simulate(const std::string& output, const std::string& format, const std::string& dgp_name,
                 double df, long n, int reps, std::uint64_t seed, const std::string& grid_text,
                 double ci_level) {
  validate_ci_level(ci_level);
  crpd::SimulationConfig config;
  if (dgp_name == "normal") {
    config.dgp.kind = crpd::DgpKind::normal;
  } else if (dgp_name == "student-t") {
    config.dgp.kind = crpd::DgpKind::student_t;
    config.dgp.df = df;
  } else {
    throw crpd::UsageError("bad_dgp",
                           "unknown dgp '" + dgp_name + "' (expected normal or student-t)");
  }
  config.n = n;
  config.replications = reps;
  config.seed = seed;
  config.ci_level = ci_level;
  if (!grid_text.empty()) config.gamma_grid = parse_gamma_grid(grid_text);
  OutputSink sink(output);

  const auto cells = crpd::run_study({config});

  if (format == "json") {
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "simulate";
    doc["dgp"] = dgp_cli_label(config.dgp);
    doc["n"] = static_cast<long>(config.n);
    doc["replications"] = config.replications;
    doc["seed"] = config.seed;
    doc["ci_level"] = config.ci_level;
    doc["gamma_grid"] = config.gamma_grid;
    ordered_json rows = ordered_json::array();
    for (const auto& cell : cells) {
      ordered_json row;
      row["gamma"] = cell.gamma;
      row["used"] = cell.used;
      row["failures"] = cell.failures;
      row["bias"] = cell.bias;
      row["mse"] = cell.mse;
      row["coverage_distortion"] = cell.coverage_distortion;
      row["empirical_sd"] = cell.empirical_sd ? ordered_json(*cell.empirical_sd) : nullptr;
      row["mean_se"] = cell.mean_se;
      row["sd_se_ratio"] = cell.sd_se_ratio ? ordered_json(*cell.sd_se_ratio) : nullptr;
      rows.push_back(std::move(row));
    }
    doc["cells"] = std::move(rows);
    sink.stream() << doc.dump(2) << '\n';
  } else {
    auto& out = sink.stream();
    out << "dgp,n,gamma,bias,mse,coverage_distortion,empirical_sd,mean_se,ratio\n";
    for (const auto& cell : cells) {
      out << dgp_cli_label(cell.dgp) << ',' << cell.n << ',' << crpd::format_double(cell.gamma)
          << ',' << crpd::format_double(cell.bias) << ',' << crpd::format_double(cell.mse) << ','
          << crpd::format_double(cell.coverage_distortion) << ','
          << (cell.empirical_sd ? crpd::format_double(*cell.empirical_sd) : "") << ','
          << crpd::format_double(cell.mean_se) << ','
          << (cell.sd_se_ratio ? crpd::format_double(*cell.sd_se_ratio) : "") << '\n';
    }
  }
  sink.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cressie-Read power divergence moment estimation"};
  app.require_subcommand(1);

  CommonOpts est_opts, cv_opts;
  double gamma_value = 0.0;
  bool include_weights = false;

  auto* est = app.add_subcommand("estimate", "Fit the model at one gamma");
  est->add_option("--input", est_opts.input, "Input CSV file")->required();
  est->add_option("--output", est_opts.output, "Output file (default stdout)");
  est->add_option("--format", est_opts.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->default_val("json");
  est->add_option("--model", est_opts.model, "mean-only | instrumented-mean | central-moments");
  est->add_option("--gamma", gamma_value, "Divergence index")->required();
  est->add_option("--ci-level", est_opts.ci_level, "Confidence level")->default_val(0.95);
  est->add_option("--bounds", est_opts.bounds, "Search box lo:hi[,lo:hi...]");
  est->add_option("--outcome", est_opts.outcome, "Outcome column override");
  est->add_option("--instruments", est_opts.instruments, "Instrument columns")->delimiter(',');
  est->add_flag("--weights", include_weights, "Include the full weight vector (json)");

  std::string cv_grid = "-1:1:0.25", cv_loss = "moment-instability";
  int cv_folds = 5;
  std::uint64_t cv_seed = 0;
  bool cv_no_shuffle = false;

  auto* cv = app.add_subcommand("crossval", "Select gamma by k-fold cross-validation");
  cv->add_option("--input", cv_opts.input, "Input CSV file")->required();
  cv->add_option("--output", cv_opts.output, "Output file (default stdout)");
  cv->add_option("--format", cv_opts.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->default_val("csv");
  cv->add_option("--model", cv_opts.model, "mean-only | instrumented-mean | central-moments");
  cv->add_option("--grid", cv_grid, "Gamma grid lo:hi:step")->required();
  cv->add_option("--folds", cv_folds, "Fold count")->default_val(5);
  cv->add_option("--loss", cv_loss, "moment-instability | prediction-mse");
  cv->add_option("--seed", cv_seed, "Fold-assignment seed")->default_val(0);
  cv->add_flag("--no-shuffle", cv_no_shuffle, "Contiguous folds in file order");
  cv->add_option("--ci-level", cv_opts.ci_level, "Confidence level")->default_val(0.95);
  cv->add_option("--bounds", cv_opts.bounds, "Search box lo:hi[,lo:hi...]");
  cv->add_option("--outcome", cv_opts.outcome, "Outcome column override");
  cv->add_option("--instruments", cv_opts.instruments, "Instrument columns")->delimiter(',');

  std::string sim_output, sim_format = "csv", sim_dgp = "normal", sim_grid;
  double sim_df = 5.0, sim_ci = 0.95;
  long sim_n = 50;
  int sim_reps = 1000;
  std::uint64_t sim_seed = 0;

  auto* sim = app.add_subcommand("simulate", "Monte Carlo study of the estimator");
  sim->add_option("--output", sim_output, "Output file (default stdout)");
  sim->add_option("--format", sim_format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->default_val("csv");
  sim->add_option("--dgp", sim_dgp, "normal | student-t")->default_val("normal");
  sim->add_option("--df", sim_df, "Student-t degrees of freedom")->default_val(5.0);
  sim->add_option("--n", sim_n, "Sample size per replication")->default_val(50);
  sim->add_option("--reps", sim_reps, "Replication count")->default_val(1000);
  sim->add_option("--seed", sim_seed, "Stream seed")->default_val(0);
  sim->add_option("--grid", sim_grid, "Gamma grid lo:hi:step (default -1:1:0.25)");
  sim->add_option("--ci-level", sim_ci, "Confidence level")->default_val(0.95);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage/cli_parse: " << e.what() << '\n';
    return 1;
  }

  try {
    if (est->parsed()) return run_estimate(est_opts, gamma_value, include_weights);
    if (cv->parsed()) {
      return run_crossval(cv_opts, cv_grid, cv_folds, cv_loss, cv_seed, cv_no_shuffle);
    }
    return run_simulate(sim_output, sim_format, sim_dgp, sim_df, sim_n, sim_reps, sim_seed,
                        sim_grid, sim_ci);
  } catch (const crpd::Error& e) {
    const char* category = e.category() == crpd::ErrorCategory::usage     ? "usage"
                           : e.category() == crpd::ErrorCategory::data    ? "data"
                                                                          : "numerical";
    std::cerr << "error: " << category << '/' << e.code() << ": " << e.what() << '\n';
    switch (e.category()) {
      case crpd::ErrorCategory::usage:
        return 1;
      case crpd::ErrorCategory::data:
        return 2;
      case crpd::ErrorCategory::numerical:
        return 3;
    }
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: usage/bad_argument: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: numerical/internal: " << e.what() << '\n';
    return 3;
  }
}
