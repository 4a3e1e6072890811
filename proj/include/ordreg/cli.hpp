#pragma once

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ordreg/csv.hpp"
#include "ordreg/fitfile.hpp"
#include "ordreg/sim.hpp"
#include "ordreg/tune.hpp"

namespace ordreg {
namespace cli {

inline std::string g7(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.7g", v);
  return buf;
}

inline std::string full(double v) { return detail::double_to_string(v); }

// Column label for linear predictor j (1-based), e.g. "logit(P[Y<=1])".
inline std::string predictor_label(const ModelSpec& spec, Eigen::Index j) {
  std::string inner;
  switch (spec.family) {
    case Family::cumulative:
      inner = spec.reverse ? "P[Y>=" + std::to_string(j + 1) + "]"
                           : "P[Y<=" + std::to_string(j) + "]";
      break;
    case Family::sratio:
      inner = spec.reverse
                  ? "P[Y=" + std::to_string(j + 1) + "|Y<=" + std::to_string(j + 1) + "]"
                  : "P[Y=" + std::to_string(j) + "|Y>=" + std::to_string(j) + "]";
      break;
    case Family::cratio:
      inner = spec.reverse ? "P[Y<" + std::to_string(j) + "|Y<=" + std::to_string(j) + "]"
                           : "P[Y>" + std::to_string(j) + "|Y>=" + std::to_string(j) + "]";
      break;
    case Family::acat:
      inner = spec.reverse
                  ? "P[Y=" + std::to_string(j) + "|" + std::to_string(j) + "<=Y<=" +
                        std::to_string(j + 1) + "]"
                  : "P[Y=" + std::to_string(j + 1) + "|" + std::to_string(j) + "<=Y<=" +
                        std::to_string(j + 1) + "]";
      break;
  }
  return std::string(to_string(spec.link)) + "(" + inner + ")";
}

struct CommonArgs {
  std::string data_path;
  std::string response;
  std::vector<std::string> levels;
  std::vector<std::string> count_cols;

  std::string family = "cumulative";
  std::string link = "logit";
  bool reverse = false;
  bool parallel_terms = true;
  bool nonparallel_terms = false;
  double alpha = 1.0;
  double parallel_penalty_factor = 1.0;
  std::vector<double> penalty_factors;
  std::vector<int> positive_id;
  bool standardize = true;
  std::vector<double> lambda_vals;
  int n_lambda = 20;
  double lambda_min_ratio = 0.01;
  bool include_lambda0 = false;
  double alpha_min = 0.01;
  double p_min = 1e-8;
  double stop_thresh = 1e-4;
  double thresh_out = 1e-8;
  double thresh_in = 1e-8;
  int maxiter_out = 100;
  int maxiter_in = 1000;
  bool warn = true;
  bool verbose = false;
};

inline void add_data_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--data", args.data_path, "input CSV file")->required();
  cmd->add_option("--response", args.response,
                  "categorical response column (levels by first appearance)");
  cmd->add_option("--levels", args.levels, "explicit response level order")
      ->delimiter(',');
  cmd->add_option("--countCols", args.count_cols,
                  "K+1 response count columns, in category order")
      ->delimiter(',');
}

inline void add_model_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--family", args.family, "cumulative, sratio, cratio, or acat")
      ->check(CLI::IsMember({"cumulative", "sratio", "cratio", "acat"}));
  cmd->add_option("--link", args.link, "logit, probit, cloglog, or cauchit")
      ->check(CLI::IsMember({"logit", "probit", "cloglog", "cauchit"}));
  cmd->add_option("--reverse", args.reverse, "fit the backward form (reverse category order)");
  cmd->add_option("--parallelTerms", args.parallel_terms, "include parallel coefficients");
  cmd->add_option("--nonparallelTerms", args.nonparallel_terms,
                  "include nonparallel coefficients");
  cmd->add_option("--alpha", args.alpha, "elastic net mixing parameter in [0,1]");
  cmd->add_option("--parallelPenaltyFactor", args.parallel_penalty_factor,
                  "penalty multiplier for parallel terms (rho)");
  cmd->add_option("--penaltyFactors", args.penalty_factors,
                  "per-covariate penalty factors")
      ->delimiter(',');
  cmd->add_option("--positiveID", args.positive_id,
                  "per-covariate nonnegativity flags (0/1)")
      ->delimiter(',');
  cmd->add_option("--standardize", args.standardize, "scale covariates to unit variance");
  cmd->add_option("--lambdaVals", args.lambda_vals, "user-specified lambda sequence")
      ->delimiter(',');
  cmd->add_option("--nLambda", args.n_lambda, "number of lambda values");
  cmd->add_option("--lambdaMinRatio", args.lambda_min_ratio, "lambda_min/lambda_max");
  cmd->add_option("--includeLambda0", args.include_lambda0, "append lambda=0");
  cmd->add_option("--alphaMin", args.alpha_min, "alpha floor for the lambda_max computation");
  cmd->add_option("--pMin", args.p_min, "probability floor inside the information matrix");
  cmd->add_option("--stopThresh", args.stop_thresh,
                  "relative loglik change between lambdas that stops the path");
  cmd->add_option("--threshOut", args.thresh_out, "outer loop convergence threshold");
  cmd->add_option("--threshIn", args.thresh_in, "inner loop convergence threshold");
  cmd->add_option("--maxiterOut", args.maxiter_out, "outer iteration limit");
  cmd->add_option("--maxiterIn", args.maxiter_in, "inner iteration limit");
  cmd->add_option("--warn", args.warn, "emit model warnings");
  cmd->add_flag("--verbose", args.verbose, "trace progress to stderr");
}

inline Dataset load_dataset(const CommonArgs& args) {
  IngestOptions opts;
  opts.response_column = args.response;
  opts.levels = args.levels;
  opts.count_columns = args.count_cols;
  return ingest_csv(args.data_path, opts);
}

inline FitOptions build_fit_options(const CommonArgs& args) {
  FitOptions options;
  options.spec.family = detail::family_from_name(args.family);
  options.spec.link = detail::link_from_name(args.link);
  options.spec.reverse = args.reverse;
  options.spec.parallel_terms = args.parallel_terms;
  options.spec.nonparallel_terms = args.nonparallel_terms;
  options.penalty.alpha = args.alpha;
  options.penalty.rho = args.parallel_penalty_factor;
  options.penalty.alpha_min = args.alpha_min;
  if (!args.penalty_factors.empty()) {
    options.penalty.covariate_factors =
        Eigen::Map<const VectorXd>(args.penalty_factors.data(),
                                   static_cast<Eigen::Index>(args.penalty_factors.size()));
  }
  for (int flag : args.positive_id) options.penalty.covariate_positive.push_back(flag != 0);
  options.standardize = args.standardize;
  options.lambda_values = args.lambda_vals;
  options.controls.n_lambda = args.n_lambda;
  options.controls.lambda_min_ratio = args.lambda_min_ratio;
  options.controls.include_lambda0 = args.include_lambda0;
  options.controls.p_min = args.p_min;
  options.controls.stop_thresh = args.stop_thresh;
  options.controls.thresh_out = args.thresh_out;
  options.controls.thresh_in = args.thresh_in;
  options.controls.maxiter_out = args.maxiter_out;
  options.controls.maxiter_in = args.maxiter_in;
  return options;
}

inline void maybe_warn_cumulative(const FitOptions& options, const CommonArgs& args,
                                  std::ostream& err) {
  if (args.warn && options.spec.family == Family::cumulative &&
      options.spec.nonparallel_terms) {
    err << "warning: for out-of-sample data, the cumulative probability model with "
           "nonparallelTerms=TRUE may predict cumulative probabilities that are not "
           "monotone increasing\n";
  }
}

inline void write_summary(const FitModel& fit, std::ostream& out) {
  out << "lambdaVals\tnNonzero\tloglik\tdevPct\taic\tbic\n";
  for (const SummaryRow& row : path_summary(fit)) {
    out << g7(row.lambda) << "\t" << row.n_nonzero << "\t" << g7(row.loglik) << "\t"
        << g7(row.dev_pct) << "\t" << g7(row.aic) << "\t" << g7(row.bic) << "\n";
  }
}

// Coefficient matrix in one-column-per-linear-predictor orientation; the
// covariate rows show the combined (parallel + nonparallel) coefficient.
inline void write_coef_matrix(const FitModel& fit, std::ostream& out) {
  const Eigen::Index k = fit.n_predictors;
  out << "lambdaIndex\tterm";
  for (Eigen::Index j = 1; j <= k; ++j) out << "\t" << predictor_label(fit.spec, j);
  out << "\n";
  for (size_t m = 0; m < fit.path.size(); ++m) {
    const Coefficients& coef = fit.path[m].coef;
    out << (m + 1) << "\t(Intercept)";
    for (Eigen::Index j = 0; j < k; ++j) out << "\t" << full(coef.b0[j]);
    out << "\n";
    for (Eigen::Index cov = 0; cov < fit.n_covariates; ++cov) {
      out << (m + 1) << "\t" << fit.x_names[static_cast<size_t>(cov)];
      for (Eigen::Index j = 0; j < k; ++j) {
        double value = 0.0;
        if (coef.b.size() > 0) value += coef.b[cov];
        if (coef.B.size() > 0) value += coef.B(cov, j);
        out << "\t" << full(value);
      }
      out << "\n";
    }
  }
}

inline FoldPlan load_fold_plan(const std::string& path, Eigen::Index n_obs) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open folds file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& err) {
    throw DataError("cannot parse folds file: " + std::string(err.what()));
  }
  if (!doc.is_array()) throw DataError("folds file must be a JSON array of index arrays");
  FoldPlan plan;
  for (const auto& fold : doc) {
    std::vector<Eigen::Index> indices;
    for (const auto& idx : fold) {
      // Fold files use 1-based observation indices.
      indices.push_back(idx.get<Eigen::Index>() - 1);
    }
    plan.folds.push_back(std::move(indices));
  }
  plan.validate(n_obs);
  return plan;
}

inline int cmd_fit(const CommonArgs& args, const std::string& out_prefix, bool as_json,
                   std::ostream& out, std::ostream& err) {
  const Dataset data = load_dataset(args);
  const FitOptions options = build_fit_options(args);
  maybe_warn_cumulative(options, args, err);
  const FitModel fit = fit_model(data, options);
  for (const auto& w : fit.warnings) err << "warning: " << w << "\n";

  if (as_json) {
    nlohmann::ordered_json doc;
    doc["summary"] = nlohmann::ordered_json::array();
    for (const SummaryRow& row : path_summary(fit)) {
      doc["summary"].push_back({{"lambda", full(row.lambda)},
                                {"nNonzero", row.n_nonzero},
                                {"loglik", full(row.loglik)},
                                {"devPct", full(row.dev_pct)},
                                {"aic", full(row.aic)},
                                {"bic", full(row.bic)}});
    }
    doc["truncated"] = fit.truncated;
    doc["terminationReason"] = fit.termination_reason;
    out << doc.dump(2) << "\n";
  } else {
    write_summary(fit, out);
  }
  if (fit.truncated) err << "note: " << fit.termination_reason << "\n";

  if (!out_prefix.empty()) {
    std::ofstream summary(out_prefix + ".summary.tsv");
    if (!summary) throw DataError("cannot write '" + out_prefix + ".summary.tsv'");
    write_summary(fit, summary);
    std::ofstream coefs(out_prefix + ".coefs.tsv");
    if (!coefs) throw DataError("cannot write '" + out_prefix + ".coefs.tsv'");
    write_coef_matrix(fit, coefs);
    save_fit(fit, out_prefix + ".fit.json");
  }
  return 0;
}

inline int cmd_predict(const std::string& fit_path, const std::string& data_path,
                       const std::string& which, const std::string& out_path,
                       std::ostream& out, std::ostream& err) {
  const FitModel fit = load_fit(fit_path);

  // New data: covariate columns are matched to the fit by name.
  const CsvTable table = read_csv(data_path);
  MatrixXd x(static_cast<Eigen::Index>(table.rows.size()), fit.n_covariates);
  for (Eigen::Index c = 0; c < fit.n_covariates; ++c) {
    const std::string& name = fit.x_names[static_cast<size_t>(c)];
    const Eigen::Index col = table.column(name);
    for (size_t i = 0; i < table.rows.size(); ++i) {
      x(static_cast<Eigen::Index>(i), c) =
          detail::parse_double(table.rows[i][static_cast<size_t>(col)], i + 2, name);
    }
  }

  size_t index;
  if (which == "bestAIC") {
    index = best_aic_index(fit);
  } else if (which == "bestBIC") {
    index = best_bic_index(fit);
  } else {
    const long idx = std::strtol(which.c_str(), nullptr, 10);
    if (idx < 1 || static_cast<size_t>(idx) > fit.path.size()) {
      throw ConfigError("lambda index " + which + " out of range 1.." +
                        std::to_string(fit.path.size()));
    }
    index = static_cast<size_t>(idx - 1);
  }

  const Prediction pred = predict(fit, index, x);
  if (!pred.all_feasible) {
    err << "warning: some rows have non-monotone cumulative probabilities "
           "(flagged in the nonmonotone column)\n";
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw DataError("cannot write '" + out_path + "'");
    sink = &file;
  }
  for (size_t j = 0; j < fit.y_names.size(); ++j) {
    *sink << "prob_" << fit.y_names[j] << ",";
  }
  *sink << "class,nonmonotone\n";
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < pred.probs.cols(); ++j) {
      *sink << full(pred.probs(i, j)) << ",";
    }
    *sink << fit.y_names[static_cast<size_t>(pred.predicted_class[static_cast<size_t>(i)])]
          << "," << (pred.feasible[static_cast<size_t>(i)] ? 0 : 1) << "\n";
  }
  return 0;
}

inline int cmd_tune(const CommonArgs& args, int n_folds, uint64_t seed,
                    const std::string& folds_file, int threads,
                    const std::string& out_prefix, bool as_json, std::ostream& out,
                    std::ostream& err) {
  const Dataset data = load_dataset(args);
  const FitOptions options = build_fit_options(args);
  maybe_warn_cumulative(options, args, err);

  std::optional<FoldPlan> plan;
  if (!folds_file.empty()) plan = load_fold_plan(folds_file, data.n_obs());
  const TuneResult result = kfold_tune(data, options, n_folds, seed,
                                       plan ? &*plan : nullptr, threads);
  for (const auto& w : result.full_fit.warnings) err << "warning: " << w << "\n";
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";

  const Eigen::Index n_lambda = result.loglik.rows();
  const Eigen::Index f_count = result.loglik.cols();
  auto write_matrix = [&](const MatrixXd& m, std::ostream& sink) {
    sink << "lambda";
    for (Eigen::Index f = 0; f < f_count; ++f) sink << "\tfold" << (f + 1);
    sink << "\n";
    for (Eigen::Index r = 0; r < n_lambda; ++r) {
      sink << "lambda" << (r + 1);
      for (Eigen::Index f = 0; f < f_count; ++f) sink << "\t" << g7(m(r, f));
      sink << "\n";
    }
  };

  if (as_json) {
    nlohmann::ordered_json doc;
    doc["lambdas"] = nlohmann::ordered_json::array();
    for (double l : result.lambdas) doc["lambdas"].push_back(full(l));
    auto matrix_json = [&](const MatrixXd& m) {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index f = 0; f < m.cols(); ++f) row.push_back(full(m(r, f)));
        rows.push_back(std::move(row));
      }
      return rows;
    };
    doc["loglik"] = matrix_json(result.loglik);
    doc["misclass"] = matrix_json(result.misclass);
    doc["bestLambdaIndex"] = result.best_index + 1;
    out << doc.dump(2) << "\n";
  } else {
    out << "held-out log-likelihood\n";
    write_matrix(result.loglik, out);
    out << "\nheld-out misclassification rate\n";
    write_matrix(result.misclass, out);
    out << "\nbestLambdaIndex\t" << (result.best_index + 1) << "\n";
  }

  if (!out_prefix.empty()) {
    std::ofstream ll(out_prefix + ".tune_loglik.tsv");
    write_matrix(result.loglik, ll);
    std::ofstream mc(out_prefix + ".tune_misclass.tsv");
    write_matrix(result.misclass, mc);
    save_fit(result.full_fit, out_prefix + ".fit.json");
  }
  return 0;
}

inline int cmd_cv(const CommonArgs& args, int n_folds, int n_folds_cv, uint64_t seed,
                  const std::string& folds_file, int threads,
                  const std::string& out_prefix, bool as_json, std::ostream& out,
                  std::ostream& err) {
  const Dataset data = load_dataset(args);
  const FitOptions options = build_fit_options(args);
  maybe_warn_cumulative(options, args, err);

  std::optional<FoldPlan> plan;
  if (!folds_file.empty()) plan = load_fold_plan(folds_file, data.n_obs());
  const CvResult result =
      kfold_cv(data, options, n_folds, n_folds_cv, seed, plan ? &*plan : nullptr, threads);
  for (const auto& w : result.full_fit.warnings) err << "warning: " << w << "\n";
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";

  if (as_json) {
    nlohmann::ordered_json doc;
    doc["folds"] = nlohmann::ordered_json::array();
    for (const CvFoldResult& f : result.folds) {
      doc["folds"].push_back({{"bestLambdaIndex", f.best_lambda_index + 1},
                              {"loglik", full(f.loglik)},
                              {"misclass", full(f.misclass)}});
    }
    out << doc.dump(2) << "\n";
  } else {
    out << "fold\tbestLambdaIndex\tloglik\tmisclass\n";
    double ll_sum = 0.0, mc_sum = 0.0;
    for (size_t f = 0; f < result.folds.size(); ++f) {
      const CvFoldResult& res = result.folds[f];
      out << "fold" << (f + 1) << "\t" << (res.best_lambda_index + 1) << "\t"
          << g7(res.loglik) << "\t" << g7(res.misclass) << "\n";
      ll_sum += res.loglik;
      mc_sum += res.misclass;
    }
    const double n = static_cast<double>(result.folds.size());
    out << "mean\t-\t" << g7(ll_sum / n) << "\t" << g7(mc_sum / n) << "\n";
  }

  if (!out_prefix.empty()) save_fit(result.full_fit, out_prefix + ".fit.json");
  return 0;
}

inline int cmd_simulate(const std::string& scenario, int replicates, uint64_t seed,
                        int threads, Eigen::Index n_validation, int n_folds,
                        const std::string& out_path, bool as_json, std::ostream& out,
                        std::ostream& err) {
  const ExperimentResult result = run_experiment(scenario_from_name(scenario), replicates,
                                                 seed, threads, n_validation, n_folds);
  for (const auto& f : result.failures) err << "warning: " << f << "\n";

  std::ofstream file;
  std::ostream* sink = &out;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw DataError("cannot write '" + out_path + "'");
    sink = &file;
  }
  if (as_json) {
    nlohmann::ordered_json doc;
    doc["scenario"] = result.scenario;
    doc["replicates"] = result.replicates;
    doc["results"] = nlohmann::ordered_json::array();
    for (size_t f = 0; f < result.forms.size(); ++f) {
      doc["results"].push_back({{"form", result.forms[f]},
                                {"mean", full(result.means[f])},
                                {"se", full(result.std_errors[f])}});
    }
    *sink << doc.dump(2) << "\n";
  } else {
    *sink << "scenario\tform\tmean\tse\treplicates\n";
    for (size_t f = 0; f < result.forms.size(); ++f) {
      *sink << result.scenario << "\t" << result.forms[f] << "\t" << g7(result.means[f])
            << "\t" << g7(result.std_errors[f]) << "\t" << result.replicates << "\n";
    }
  }
  return 0;
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"elastic net penalized multinomial and ordinal regression"};
  app.require_subcommand(1);

  CommonArgs fit_args, tune_args, cv_args;
  std::string out_prefix, tune_out, cv_out;
  bool fit_json = false, tune_json = false, cv_json = false, sim_json = false;

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a solution path");
  add_data_options(fit_cmd, fit_args);
  add_model_options(fit_cmd, fit_args);
  fit_cmd->add_option("--out", out_prefix, "output file prefix");
  fit_cmd->add_flag("--json", fit_json, "print JSON instead of TSV");

  std::string pred_fit, pred_data, pred_which = "bestAIC", pred_out;
  CLI::App* pred_cmd = app.add_subcommand("predict", "predict classes for new data");
  pred_cmd->add_option("--fit", pred_fit, "fit file from the fit command")->required();
  pred_cmd->add_option("--data", pred_data, "CSV with the model's covariate columns")
      ->required();
  pred_cmd->add_option("--whichLambda", pred_which,
                       "bestAIC, bestBIC, or a 1-based lambda index");
  pred_cmd->add_option("--out", pred_out, "output CSV path (default stdout)");

  int tune_folds = 5, cv_folds = 5, cv_folds_inner = 5;
  uint64_t tune_seed = 1, cv_seed = 1, sim_seed = 1;
  std::string tune_folds_file, cv_folds_file;
  int tune_threads = 1, cv_threads = 1, sim_threads = 1;
  CLI::App* tune_cmd =
      app.add_subcommand("tune", "K-fold out-of-sample performance per lambda");
  add_data_options(tune_cmd, tune_args);
  add_model_options(tune_cmd, tune_args);
  tune_cmd->add_option("--nFolds", tune_folds, "number of folds");
  tune_cmd->add_option("--seed", tune_seed, "fold RNG seed");
  tune_cmd->add_option("--foldsFile", tune_folds_file,
                       "JSON file with 1-based fold index arrays");
  tune_cmd->add_option("--threads", tune_threads, "parallel fold fits");
  tune_cmd->add_option("--out", tune_out, "output file prefix");
  tune_cmd->add_flag("--json", tune_json, "print JSON instead of TSV");

  CLI::App* cv_cmd =
      app.add_subcommand("cv", "cross-validated performance with per-fold tuning");
  add_data_options(cv_cmd, cv_args);
  add_model_options(cv_cmd, cv_args);
  cv_cmd->add_option("--nFolds", cv_folds, "number of outer folds");
  cv_cmd->add_option("--nFoldsCV", cv_folds_inner, "number of inner tuning folds");
  cv_cmd->add_option("--seed", cv_seed, "fold RNG seed");
  cv_cmd->add_option("--foldsFile", cv_folds_file,
                     "JSON file with 1-based outer fold index arrays");
  cv_cmd->add_option("--threads", cv_threads, "parallel fold fits");
  cv_cmd->add_option("--out", cv_out, "output file prefix");
  cv_cmd->add_flag("--json", cv_json, "print JSON instead of TSV");

  std::string sim_scenario = "Sim1", sim_out;
  int sim_replicates = 100, sim_folds = 5;
  Eigen::Index sim_validation = 10000;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "out-of-sample prediction benchmark");
  sim_cmd->add_option("--scenario", sim_scenario, "Sim1, Sim2, or Sim3")
      ->check(CLI::IsMember({"Sim1", "Sim2", "Sim3", "sim1", "sim2", "sim3"}));
  sim_cmd->add_option("--replicates", sim_replicates, "number of replicates");
  sim_cmd->add_option("--seed", sim_seed, "master seed");
  sim_cmd->add_option("--threads", sim_threads, "parallel replicates");
  sim_cmd->add_option("--validation", sim_validation, "validation draws per replicate");
  sim_cmd->add_option("--nFolds", sim_folds, "CV folds for lambda selection");
  sim_cmd->add_option("--out", sim_out, "output TSV path (default stdout)");
  sim_cmd->add_flag("--json", sim_json, "print JSON instead of TSV");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_args, out_prefix, fit_json, out, err);
    if (pred_cmd->parsed()) {
      return cmd_predict(pred_fit, pred_data, pred_which, pred_out, out, err);
    }
    if (tune_cmd->parsed()) {
      return cmd_tune(tune_args, tune_folds, tune_seed, tune_folds_file, tune_threads,
                      tune_out, tune_json, out, err);
    }
    if (cv_cmd->parsed()) {
      return cmd_cv(cv_args, cv_folds, cv_folds_inner, cv_seed, cv_folds_file, cv_threads,
                    cv_out, cv_json, out, err);
    }
    if (sim_cmd->parsed()) {
      return cmd_simulate(sim_scenario, sim_replicates, sim_seed, sim_threads,
                          sim_validation, sim_folds, sim_out, sim_json, out, err);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace cli
}  // namespace ordreg
