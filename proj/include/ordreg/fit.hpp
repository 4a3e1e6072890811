#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ordreg/model.hpp"
#include "ordreg/optim.hpp"

namespace ordreg {

// User-level penalty settings, per covariate.
struct PenaltyOptions {
  double alpha = 1.0;
  double rho = 1.0;        // parallelPenaltyFactor
  double alpha_min = 0.01; // alphaMin
  VectorXd covariate_factors;          // penaltyFactors; empty = all ones
  std::vector<bool> covariate_positive;  // positiveID; empty = all false
};

struct FitOptions {
  ModelSpec spec;
  PenaltyOptions penalty;
  Controls controls;
  bool standardize = true;
  std::vector<double> lambda_values;  // user lambdaVals; empty = generated
};

// A fitted solution path with coefficients on the original covariate scale.
// When spec.reverse is set the coefficients parametrize the model on the
// reversed category order; predictions are mapped back to the user's order.
struct FitModel {
  ModelSpec spec;
  Eigen::Index n_obs = 0;
  Eigen::Index n_covariates = 0;
  Eigen::Index n_predictors = 0;  // K
  double n_star = 0.0;
  VectorXd scales;
  std::vector<bool> zero_variance;
  std::vector<std::string> x_names;
  std::vector<std::string> y_names;  // user category order
  double loglik_null = 0.0;
  double lambda_max_value = std::numeric_limits<double>::quiet_NaN();
  bool truncated = false;
  std::string termination_reason;
  std::vector<PathEntry> path;
  std::vector<std::string> warnings;
};

inline FitModel fit_model(const Dataset& data, const FitOptions& options) {
  options.spec.validate();
  options.controls.validate();
  data.validate();

  const Dataset working = options.spec.reverse ? reverse_categories(data) : data;

  // Zero-variance covariates are detected either way; without standardize the
  // data and scales are left untouched but the flags still freeze them.
  Standardization std_data = standardize(working);
  if (!options.standardize) {
    std_data.data = working;
    std_data.scales = VectorXd::Ones(working.n_covariates());
  }

  const CoefLayout lay =
      layout_for(options.spec, working.n_covariates(), working.n_linear_predictors());
  const PenaltyConfig pen = make_penalty_config(
      lay, options.penalty.alpha, options.penalty.rho, options.penalty.alpha_min,
      options.penalty.covariate_factors, options.penalty.covariate_positive,
      std_data.zero_variance);

  LambdaSchedule user_lambdas(options.lambda_values.begin(), options.lambda_values.end());
  FitPath raw = solution_path(options.spec, std_data.data, pen, options.controls,
                              user_lambdas);

  FitModel out;
  out.spec = options.spec;
  out.n_obs = data.n_obs();
  out.n_covariates = data.n_covariates();
  out.n_predictors = data.n_linear_predictors();
  out.n_star = data.total_trials();
  out.scales = std_data.scales;
  out.zero_variance = std_data.zero_variance;
  out.x_names = data.x_names;
  out.y_names = data.y_names;
  out.loglik_null = raw.loglik_null;
  out.lambda_max_value = raw.lambda_max_value;
  out.truncated = raw.truncated;
  out.termination_reason = raw.termination_reason;
  out.path = std::move(raw.entries);
  for (PathEntry& entry : out.path) {
    entry.coef = unstandardize(entry.coef, out.scales);
  }
  for (size_t j = 0; j < out.zero_variance.size(); ++j) {
    if (out.zero_variance[j]) {
      const std::string name = j < out.x_names.size() ? out.x_names[j]
                                                      : "x" + std::to_string(j + 1);
      out.warnings.push_back("covariate '" + name +
                             "' has zero variance; its coefficients are fixed at zero");
    }
  }
  return out;
}

// Class probabilities over all K+1 categories in the user's category order,
// plus the predicted class (argmax, ties to the lowest index) and a
// feasibility flag for cumulative-family predictions.
struct Prediction {
  MatrixXd probs;               // N x (K+1)
  std::vector<Eigen::Index> predicted_class;  // 0-based
  std::vector<bool> feasible;
  bool all_feasible = true;
};

inline Prediction predict(const FitModel& fit, size_t lambda_index, const MatrixXd& x) {
  if (lambda_index >= fit.path.size()) throw ConfigError("lambda index out of range");
  if (x.cols() != fit.n_covariates) {
    throw DataError("prediction covariates have " + std::to_string(x.cols()) +
                    " columns; model expects " + std::to_string(fit.n_covariates));
  }
  const Coefficients& coef = fit.path[lambda_index].coef;
  const Eigen::Index k = fit.n_predictors;

  Prediction out;
  out.probs.resize(x.rows(), k + 1);
  out.predicted_class.resize(static_cast<size_t>(x.rows()));
  out.feasible.assign(static_cast<size_t>(x.rows()), true);

  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const VectorXd eta = linear_predictors(coef, x.row(i).transpose());
    const InvLinkResult res = inv_link_unchecked(fit.spec.link, fit.spec.family, eta);
    VectorXd full(k + 1);
    full.head(k) = res.p;
    full[k] = 1.0 - res.p.sum();
    if (fit.spec.reverse) full.reverseInPlace();
    out.probs.row(i) = full.transpose();
    if (!res.feasible) {
      out.feasible[static_cast<size_t>(i)] = false;
      out.all_feasible = false;
    }
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j <= k; ++j) {
      if (full[j] > full[best]) best = j;
    }
    out.predicted_class[static_cast<size_t>(i)] = best;
  }
  return out;
}

// Out-of-sample log-likelihood of counts under the fit at one lambda.
// Returns -inf if any scored row is infeasible or gives nonpositive mass to
// an observed category.
inline double heldout_loglik(const FitModel& fit, size_t lambda_index,
                             const MatrixXd& x, const MatrixXd& y) {
  const Prediction pred = predict(fit, lambda_index, x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (!pred.feasible[static_cast<size_t>(i)]) {
      return -std::numeric_limits<double>::infinity();
    }
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (y(i, j) <= 0.0) continue;
      const double p = pred.probs(i, j);
      if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
      total += y(i, j) * std::log(p);
    }
  }
  return total;
}

inline double aic_of(const PathEntry& entry) {
  return -2.0 * entry.loglik + 2.0 * static_cast<double>(entry.n_nonzero);
}

inline double bic_of(const PathEntry& entry, Eigen::Index n_obs) {
  return -2.0 * entry.loglik +
         std::log(static_cast<double>(n_obs)) * static_cast<double>(entry.n_nonzero);
}

inline size_t best_aic_index(const FitModel& fit) {
  size_t best = 0;
  for (size_t m = 1; m < fit.path.size(); ++m) {
    if (aic_of(fit.path[m]) < aic_of(fit.path[best])) best = m;
  }
  return best;
}

inline size_t best_bic_index(const FitModel& fit) {
  size_t best = 0;
  for (size_t m = 1; m < fit.path.size(); ++m) {
    if (bic_of(fit.path[m], fit.n_obs) < bic_of(fit.path[best], fit.n_obs)) best = m;
  }
  return best;
}

}  // namespace ordreg
