#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ordreg/errors.hpp"
#include "ordreg/model.hpp"

namespace ordreg {

// Per-coefficient penalty description on the flattened layout. Intercepts
// always carry factor 0. `frozen` marks coefficients pinned at zero (used for
// zero-variance covariates).
struct PenaltyConfig {
  double alpha = 1.0;
  double rho = 1.0;        // multiplier folded into the parallel-block factors
  double alpha_min = 0.01; // floor for alpha when locating lambda_max
  VectorXd factors;        // length Q, nonnegative
  std::vector<char> positive;
  std::vector<char> frozen;

  void validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0,1]");
    if (rho < 0.0) throw ConfigError("parallelPenaltyFactor must be >= 0");
    if (!(alpha_min > 0.0 && alpha_min < 1.0)) {
      throw ConfigError("alphaMin must be in (0,1)");
    }
    if ((factors.array() < 0.0).any()) {
      throw ConfigError("penalty factors must be nonnegative");
    }
  }
};

// Expands per-covariate penalty settings onto the flattened coefficient
// vector: intercepts are unpenalized, parallel-block factors are scaled by
// rho, nonparallel-block factors are used as-is.
inline PenaltyConfig make_penalty_config(const CoefLayout& lay, double alpha, double rho,
                                         double alpha_min,
                                         const VectorXd& covariate_factors = VectorXd(),
                                         const std::vector<bool>& covariate_positive = {},
                                         const std::vector<bool>& covariate_frozen = {}) {
  VectorXd cf = covariate_factors;
  if (cf.size() == 0) cf = VectorXd::Ones(lay.p);
  if (cf.size() != lay.p) throw ConfigError("penaltyFactors length must equal P");

  PenaltyConfig pen;
  pen.alpha = alpha;
  pen.rho = rho;
  pen.alpha_min = alpha_min;
  const Eigen::Index q = lay.size();
  pen.factors = VectorXd::Zero(q);
  pen.positive.assign(static_cast<size_t>(q), 0);
  pen.frozen.assign(static_cast<size_t>(q), 0);
  for (Eigen::Index j = 0; j < q; ++j) {
    const Eigen::Index cov = lay.covariate_of(j);
    if (cov < 0) continue;  // intercept
    const bool in_parallel_block = lay.parallel && j < lay.k + lay.p;
    pen.factors[j] = (in_parallel_block ? rho : 1.0) * cf[cov];
    if (!covariate_positive.empty()) {
      if (static_cast<Eigen::Index>(covariate_positive.size()) != lay.p) {
        throw ConfigError("positiveID length must equal P");
      }
      pen.positive[static_cast<size_t>(j)] = covariate_positive[static_cast<size_t>(cov)];
    }
    if (!covariate_frozen.empty() && covariate_frozen[static_cast<size_t>(cov)]) {
      pen.frozen[static_cast<size_t>(j)] = 1;
    }
  }
  pen.validate();
  return pen;
}

struct Controls {
  int n_lambda = 20;
  double lambda_min_ratio = 0.01;
  bool include_lambda0 = false;
  double p_min = 1e-8;
  double stop_thresh = 1e-4;
  double thresh_out = 1e-8;
  double thresh_in = 1e-8;
  int maxiter_out = 100;
  int maxiter_in = 1000;

  void validate() const {
    if (n_lambda < 1) throw ConfigError("nLambda must be >= 1");
    if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) {
      throw ConfigError("lambdaMinRatio must be in (0,1)");
    }
    if (!(p_min > 0.0 && p_min < 1.0)) throw ConfigError("pMin must be in (0,1)");
    if (maxiter_out < 1 || maxiter_in < 1) throw ConfigError("iteration limits must be >= 1");
  }
};

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

inline double elastic_net_penalty(const VectorXd& beta, const PenaltyConfig& pen,
                                  double lambda) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double c = pen.factors[j];
    if (c == 0.0) continue;
    s += c * (pen.alpha * std::abs(beta[j]) +
              0.5 * (1.0 - pen.alpha) * beta[j] * beta[j]);
  }
  return lambda * s;
}

// Elastic net objective: -loglik/N* plus the penalty.
inline double objective(const ModelSpec& spec, const Coefficients& coef,
                        const Dataset& data, const PenaltyConfig& pen, double lambda) {
  const CoefLayout lay = layout_for(spec, data.n_covariates(), data.n_linear_predictors());
  return -log_likelihood(spec, coef, data) / data.total_trials() +
         elastic_net_penalty(coef.flatten(lay), pen, lambda);
}

// Single coordinate-descent update on the quadratic approximation anchored at
// beta_anchor, where score_r and info_r were evaluated. Returns the new value
// of coefficient j given the other coordinates at beta_cur.
inline double cd_update(Eigen::Index j, const VectorXd& score_r, const MatrixXd& info_r,
                        const VectorXd& beta_anchor, const VectorXd& beta_cur,
                        const PenaltyConfig& pen, double lambda, double n_star) {
  const double inv_n = 1.0 / n_star;
  const double num_arg =
      inv_n * (score_r[j] + info_r.row(j).dot(beta_anchor) - info_r.row(j).dot(beta_cur) +
               info_r(j, j) * beta_cur[j]);
  const double c = pen.factors[j];
  const double threshold = lambda * pen.alpha * c;
  const double denom = inv_n * info_r(j, j) + lambda * (1.0 - pen.alpha) * c;
  double num;
  if (pen.positive[static_cast<size_t>(j)]) {
    num = std::max(num_arg - threshold, 0.0);
  } else {
    num = soft_threshold(num_arg, threshold);
  }
  if (!(denom > 0.0)) {
    if (num == 0.0) return 0.0;
    throw NumericError("degenerate coordinate " + std::to_string(j + 1) +
                       ": zero curvature and zero penalty");
  }
  return num / denom;
}

namespace detail {

// Quadratic model of the log-likelihood at an anchor point, with the Hessian
// replaced by the negative Fisher information.
struct QuadApprox {
  VectorXd beta_anchor;
  double loglik_anchor = 0.0;
  VectorXd score;          // U at the anchor
  const MatrixXd* info = nullptr;
  VectorXd info_beta_anchor;

  double loglik_at(const VectorXd& beta, const VectorXd& info_beta) const {
    const VectorXd d = beta - beta_anchor;
    return loglik_anchor + d.dot(score) - 0.5 * d.dot(info_beta - info_beta_anchor);
  }
};

enum class SweepMode { all_penalized, unpenalized_only };

struct InnerResult {
  bool converged = true;
  int sweeps = 0;
};

// Cyclic coordinate descent on the penalized quadratic model. Cycles the
// active set (nonzero or unpenalized coordinates) to convergence, then makes
// one pass over the inactive coordinates and re-enters if any activates.
inline InnerResult inner_loop(const QuadApprox& quad, VectorXd& beta,
                              const PenaltyConfig& pen, double lambda, double n_star,
                              const Controls& ctl, SweepMode mode,
                              std::vector<double>* objective_trace = nullptr) {
  const Eigen::Index q = beta.size();
  const MatrixXd& info = *quad.info;
  const double inv_n = 1.0 / n_star;

  std::vector<Eigen::Index> active;
  std::vector<char> in_active(static_cast<size_t>(q), 0);
  auto activate = [&](Eigen::Index j) {
    active.push_back(j);
    in_active[static_cast<size_t>(j)] = 1;
  };
  for (Eigen::Index j = 0; j < q; ++j) {
    if (pen.frozen[static_cast<size_t>(j)]) continue;
    if (mode == SweepMode::unpenalized_only) {
      if (pen.factors[j] == 0.0) activate(j);
    } else if (beta[j] != 0.0 || pen.factors[j] == 0.0) {
      activate(j);
    }
  }

  VectorXd info_beta = info * beta;

  auto update_coord = [&](Eigen::Index j) -> bool {
    const double num_arg = inv_n * (quad.score[j] + quad.info_beta_anchor[j] -
                                    info_beta[j] + info(j, j) * beta[j]);
    const double c = pen.factors[j];
    const double threshold = lambda * pen.alpha * c;
    const double denom = inv_n * info(j, j) + lambda * (1.0 - pen.alpha) * c;
    double num;
    if (pen.positive[static_cast<size_t>(j)]) {
      num = std::max(num_arg - threshold, 0.0);
    } else {
      num = soft_threshold(num_arg, threshold);
    }
    double value;
    if (!(denom > 0.0)) {
      if (num != 0.0) {
        throw NumericError("degenerate coordinate " + std::to_string(j + 1) +
                           ": zero curvature and zero penalty");
      }
      value = 0.0;
    } else {
      value = num / denom;
    }
    if (value == beta[j]) return false;
    info_beta += info.col(j) * (value - beta[j]);
    beta[j] = value;
    return true;
  };

  auto current_objective = [&]() {
    return -inv_n * quad.loglik_at(beta, info_beta) + elastic_net_penalty(beta, pen, lambda);
  };

  InnerResult res;
  double obj = current_objective();
  if (objective_trace) objective_trace->push_back(obj);
  while (true) {
    if (res.sweeps >= ctl.maxiter_in) {
      res.converged = false;
      return res;
    }
    for (Eigen::Index j : active) {
      update_coord(j);
      if (objective_trace) objective_trace->push_back(current_objective());
    }
    ++res.sweeps;
    const double new_obj = current_objective();
    const bool cycle_done =
        std::abs(new_obj - obj) / (std::abs(obj) + 1e-10) < ctl.thresh_in;
    obj = new_obj;
    if (!cycle_done) continue;
    if (mode == SweepMode::unpenalized_only) return res;

    bool activated = false;
    for (Eigen::Index j = 0; j < q; ++j) {
      if (in_active[static_cast<size_t>(j)] || pen.frozen[static_cast<size_t>(j)]) continue;
      if (update_coord(j)) {
        activate(j);
        activated = true;
      }
      if (objective_trace) objective_trace->push_back(current_objective());
    }
    if (!activated) return res;
    obj = current_objective();
  }
}

}  // namespace detail

// Result of one penalized fit at a fixed lambda.
struct SingleFit {
  Coefficients coef;
  double loglik = 0.0;
  bool converged = true;
  bool inner_converged = true;
  int outer_iterations = 0;
};

// IRLS outer loop: rebuild the quadratic approximation at the current
// estimates, minimize the penalized quadratic by coordinate descent, repeat
// until the relative change in the elastic net objective is below thresh_out.
// If the iteration limit is hit, the best-objective iterate seen is returned
// with converged=false.
inline SingleFit fit_single_lambda(const ModelSpec& spec, const Dataset& data,
                                   const PenaltyConfig& pen, double lambda,
                                   const Coefficients& warm_start, const Controls& ctl,
                                   detail::SweepMode mode = detail::SweepMode::all_penalized) {
  const CoefLayout lay = layout_for(spec, data.n_covariates(), data.n_linear_predictors());
  const double n_star = data.total_trials();

  SingleFit fit;
  fit.coef = warm_start;
  VectorXd beta = warm_start.flatten(lay);

  LikelihoodParts parts = likelihood_parts(spec, fit.coef, data, ctl.p_min);
  double obj = -parts.loglik / n_star + elastic_net_penalty(beta, pen, lambda);
  fit.loglik = parts.loglik;

  double best_obj = obj;
  VectorXd best_beta = beta;
  double best_loglik = parts.loglik;

  for (int r = 0; r < ctl.maxiter_out; ++r) {
    detail::QuadApprox quad;
    quad.beta_anchor = beta;
    quad.loglik_anchor = parts.loglik;
    quad.score = parts.score;
    quad.info = &parts.info;
    quad.info_beta_anchor = parts.info * beta;

    VectorXd beta_new = beta;
    const auto inner = detail::inner_loop(quad, beta_new, pen, lambda, n_star, ctl, mode);
    if (!inner.converged) fit.inner_converged = false;
    ++fit.outer_iterations;

    const Coefficients coef_new = Coefficients::unflatten(lay, beta_new);
    LikelihoodParts parts_new = likelihood_parts(spec, coef_new, data, ctl.p_min);
    const double obj_new =
        -parts_new.loglik / n_star + elastic_net_penalty(beta_new, pen, lambda);

    beta = beta_new;
    parts = std::move(parts_new);
    fit.coef = coef_new;
    fit.loglik = parts.loglik;

    if (obj_new < best_obj) {
      best_obj = obj_new;
      best_beta = beta;
      best_loglik = parts.loglik;
    }
    if (std::abs(obj_new - obj) / (std::abs(obj) + 1e-10) < ctl.thresh_out) {
      return fit;
    }
    obj = obj_new;
  }
  fit.converged = false;
  fit.coef = Coefficients::unflatten(lay, best_beta);
  fit.loglik = best_loglik;
  return fit;
}

// Intercept starting values: observed response frequencies (floored at p_min)
// pushed through the link. All other coefficients start at zero.
inline Coefficients starting_values(const ModelSpec& spec, const Dataset& data,
                                    double p_min) {
  const Eigen::Index k = data.n_linear_predictors();
  VectorXd freq = data.y.colwise().sum() / data.total_trials();
  for (Eigen::Index j = 0; j <= k; ++j) freq[j] = std::max(freq[j], p_min);
  freq /= freq.sum();

  const VectorXd delta = family_fun(spec.family, freq.head(k));
  const CoefLayout lay = layout_for(spec, data.n_covariates(), k);
  Coefficients coef = Coefficients::zero(lay);
  for (Eigen::Index j = 0; j < k; ++j) {
    coef.b0[j] = link_fun(spec.link, clamp_unit(delta[j]));
  }
  return coef;
}

// Maximum-likelihood fit of the intercepts plus any unpenalized non-intercept
// coefficients, with every penalized coefficient held at zero. On degenerate
// data an IRLS step can overshoot a cumulative fit into infeasibility; the
// frequency-based starting values (always feasible) then stand in.
inline SingleFit fit_null_model(const ModelSpec& spec, const Dataset& data,
                                const PenaltyConfig& pen, const Controls& ctl) {
  const Coefficients start = starting_values(spec, data, ctl.p_min);
  try {
    return fit_single_lambda(spec, data, pen, 0.0, start, ctl,
                             detail::SweepMode::unpenalized_only);
  } catch (const InfeasibleError&) {
    SingleFit fit;
    fit.coef = start;
    fit.loglik = log_likelihood(spec, start, data);
    fit.converged = false;
    return fit;
  }
}

// Smallest lambda at which every penalized coefficient's update is zero,
// computed from the score at the null fit. For nonnegative-constrained
// coefficients only the positive part of the score can activate them.
inline double lambda_max(const ModelSpec& spec, const Dataset& data,
                         const PenaltyConfig& pen, const Controls& ctl,
                         const SingleFit* null_fit = nullptr) {
  SingleFit local;
  if (null_fit == nullptr) {
    local = fit_null_model(spec, data, pen, ctl);
    null_fit = &local;
  }
  const VectorXd u = score(spec, null_fit->coef, data);
  const double alpha_eff = std::max(pen.alpha, pen.alpha_min);
  const double n_star = data.total_trials();

  double best = -1.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (pen.factors[j] <= 0.0 || pen.frozen[static_cast<size_t>(j)]) continue;
    const double numer = pen.positive[static_cast<size_t>(j)] ? std::max(u[j], 0.0)
                                                              : std::abs(u[j]);
    best = std::max(best, numer / (n_star * alpha_eff * pen.factors[j]));
  }
  if (best < 0.0) throw ConfigError("no penalized coefficients: lambda_max undefined");
  // Nudge up by a few ulps so reconstructing threshold*factor from the
  // quotient cannot round below the entry condition at lambda_max itself.
  return best * (1.0 + 16.0 * std::numeric_limits<double>::epsilon());
}

using LambdaSchedule = std::vector<double>;

// n log-uniform values from lambda_max down to lambda_max*min_ratio, with an
// optional trailing zero.
inline LambdaSchedule lambda_sequence(double lam_max, int n_lambda, double min_ratio,
                                      bool include_zero) {
  if (n_lambda < 1) throw ConfigError("nLambda must be >= 1");
  if (!(lam_max > 0.0)) throw NumericError("lambda_max must be positive");
  LambdaSchedule seq;
  seq.reserve(static_cast<size_t>(n_lambda) + (include_zero ? 1 : 0));
  if (n_lambda == 1) {
    seq.push_back(lam_max);
  } else {
    const double log_max = std::log(lam_max);
    const double log_min = std::log(lam_max * min_ratio);
    for (int m = 0; m < n_lambda; ++m) {
      const double t = static_cast<double>(m) / (n_lambda - 1);
      seq.push_back(std::exp(log_max + t * (log_min - log_max)));
    }
  }
  if (include_zero) seq.push_back(0.0);
  return seq;
}

enum class EntryStatus {
  fitted,             // optimized at this lambda
  reused_stop,        // copied forward after the relative loglik change stop
  reused_infeasible,  // copied forward after a feasibility termination
};

struct PathEntry {
  double lambda = 0.0;
  Coefficients coef;
  double loglik = 0.0;
  Eigen::Index n_nonzero = 0;
  bool converged = true;
  bool inner_converged = true;
  int outer_iterations = 0;
  EntryStatus status = EntryStatus::fitted;
};

struct FitPath {
  std::vector<PathEntry> entries;
  Coefficients null_coef;
  double loglik_null = 0.0;
  double lambda_max_value = std::numeric_limits<double>::quiet_NaN();
  bool truncated = false;
  std::string termination_reason;
};

// Fits the solution path over a decreasing lambda schedule with warm starts.
// The cumulative family may leave its feasible region mid-path; the path is
// then frozen at the preceding solution and all remaining entries repeat it.
inline FitPath solution_path(const ModelSpec& spec, const Dataset& data,
                             const PenaltyConfig& pen, const Controls& ctl,
                             const LambdaSchedule& user_lambdas = {}) {
  spec.validate();
  pen.validate();
  ctl.validate();
  data.validate();

  FitPath path;
  const SingleFit null_fit = fit_null_model(spec, data, pen, ctl);
  path.null_coef = null_fit.coef;
  path.loglik_null = null_fit.loglik;

  LambdaSchedule schedule;
  bool auto_schedule = false;
  if (!user_lambdas.empty()) {
    schedule = user_lambdas;
    std::sort(schedule.begin(), schedule.end(), std::greater<double>());
    for (double l : schedule) {
      if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambda values must be finite and >= 0");
    }
  } else {
    const bool any_penalized = [&] {
      for (Eigen::Index j = 0; j < pen.factors.size(); ++j) {
        if (pen.factors[j] > 0.0 && !pen.frozen[static_cast<size_t>(j)]) return true;
      }
      return false;
    }();
    if (any_penalized) {
      path.lambda_max_value = lambda_max(spec, data, pen, ctl, &null_fit);
      schedule = lambda_sequence(path.lambda_max_value, ctl.n_lambda,
                                 ctl.lambda_min_ratio, ctl.include_lambda0);
      auto_schedule = true;
    } else {
      // Nothing to penalize: the path degenerates to one unpenalized fit.
      schedule = {0.0};
    }
  }

  Coefficients warm = null_fit.coef;
  double prev_loglik = null_fit.loglik;
  bool frozen_stop = false;
  size_t first = 0;

  if (auto_schedule) {
    // At lambda_max the null fit is already the solution; record it directly.
    PathEntry entry;
    entry.lambda = schedule[0];
    entry.coef = null_fit.coef;
    entry.loglik = null_fit.loglik;
    entry.n_nonzero = null_fit.coef.count_nonzero();
    entry.converged = null_fit.converged;
    entry.inner_converged = null_fit.inner_converged;
    entry.outer_iterations = null_fit.outer_iterations;
    path.entries.push_back(std::move(entry));
    first = 1;
  }

  for (size_t m = first; m < schedule.size(); ++m) {
    const double lambda = schedule[m];
    if (path.truncated || frozen_stop) {
      PathEntry entry = path.entries.back();
      entry.lambda = lambda;
      entry.status = path.truncated ? EntryStatus::reused_infeasible : EntryStatus::reused_stop;
      path.entries.push_back(std::move(entry));
      continue;
    }
    SingleFit fit;
    try {
      fit = fit_single_lambda(spec, data, pen, lambda, warm, ctl);
    } catch (const InfeasibleError& err) {
      path.truncated = true;
      path.termination_reason =
          "solution path terminated at lambda index " + std::to_string(m + 1) + " (lambda=" +
          std::to_string(lambda) + "): " + err.what();
      PathEntry entry;
      if (path.entries.empty()) {
        // Even the first lambda left the feasible region; the intercept-only
        // fit (always feasible) stands in for the whole path.
        entry.coef = null_fit.coef;
        entry.loglik = null_fit.loglik;
        entry.n_nonzero = null_fit.coef.count_nonzero();
        entry.converged = null_fit.converged;
        entry.inner_converged = null_fit.inner_converged;
        entry.outer_iterations = null_fit.outer_iterations;
      } else {
        entry = path.entries.back();
      }
      entry.lambda = lambda;
      entry.status = EntryStatus::reused_infeasible;
      path.entries.push_back(std::move(entry));
      continue;
    }

    PathEntry entry;
    entry.lambda = lambda;
    entry.coef = fit.coef;
    entry.loglik = fit.loglik;
    entry.n_nonzero = fit.coef.count_nonzero();
    entry.converged = fit.converged;
    entry.inner_converged = fit.inner_converged;
    entry.outer_iterations = fit.outer_iterations;
    path.entries.push_back(std::move(entry));

    warm = fit.coef;
    if (m > 0) {
      const double rel =
          std::abs(fit.loglik - prev_loglik) / (std::abs(prev_loglik) + 1e-10);
      if (rel < ctl.stop_thresh) frozen_stop = true;
    }
    prev_loglik = fit.loglik;
  }
  return path;
}

// Maximum violation of the subgradient optimality conditions of the elastic
// net objective at a candidate solution. Small values certify optimality.
inline double kkt_max_violation(const ModelSpec& spec, const Dataset& data,
                                const PenaltyConfig& pen, double lambda,
                                const Coefficients& coef) {
  const CoefLayout lay = layout_for(spec, data.n_covariates(), data.n_linear_predictors());
  const VectorXd u = score(spec, coef, data);
  const VectorXd beta = coef.flatten(lay);
  const double n_star = data.total_trials();

  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (pen.frozen[static_cast<size_t>(j)]) continue;
    const double g = u[j] / n_star;
    const double c = pen.factors[j];
    double viol;
    if (c == 0.0) {
      viol = std::abs(g);
    } else if (beta[j] != 0.0) {
      viol = std::abs(g - lambda * c * (pen.alpha * (beta[j] > 0.0 ? 1.0 : -1.0) +
                                        (1.0 - pen.alpha) * beta[j]));
    } else if (pen.positive[static_cast<size_t>(j)]) {
      viol = std::max(0.0, g - lambda * pen.alpha * c);
    } else {
      viol = std::max(0.0, std::abs(g) - lambda * pen.alpha * c);
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

// Penalty-minimizing decomposition beta_k = delta_k + zeta of one coefficient
// row of the overparametrized (semi-parallel) model. For the pure lasso with
// integer rho the optimum can be a closed interval; its midpoint is returned.
struct SplitResult {
  double zeta = 0.0;
  VectorXd deltas;
};

inline SplitResult optimal_split(const VectorXd& beta_row, double rho, double alpha) {
  const Eigen::Index k = beta_row.size();
  if (k == 0) throw ConfigError("optimal_split needs a nonempty row");
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0,1]");
  if (rho < 0.0) throw ConfigError("rho must be >= 0");

  SplitResult out;
  if (alpha == 0.0) {
    out.zeta = beta_row.sum() / (static_cast<double>(k) + rho);
    out.deltas = beta_row.array() - out.zeta;
    return out;
  }

  // The penalty derivative in zeta is nondecreasing and piecewise linear with
  // breakpoints at 0 and at each beta_k; walk the intervals for its zero.
  std::vector<double> bps(beta_row.data(), beta_row.data() + k);
  bps.push_back(0.0);
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

  const double slope = (1.0 - alpha) * (rho + static_cast<double>(k));
  const double sum_beta = beta_row.sum();

  auto intercept_at = [&](double rep) {
    // Derivative offset on the open interval containing `rep`.
    const double sgn = rep > 0.0 ? 1.0 : -1.0;
    int n_above = 0, n_below = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (beta_row[j] > rep) ++n_above;
      else if (beta_row[j] < rep) ++n_below;
    }
    return rho * alpha * sgn - alpha * static_cast<double>(n_above - n_below) -
           (1.0 - alpha) * sum_beta;
  };

  const size_t m = bps.size();
  auto finish = [&](double zeta) {
    out.zeta = zeta;
    out.deltas = beta_row.array() - zeta;
    return out;
  };

  for (size_t i = 0; i <= m; ++i) {
    const double lo = (i == 0) ? -std::numeric_limits<double>::infinity() : bps[i - 1];
    const double hi = (i == m) ? std::numeric_limits<double>::infinity() : bps[i];
    double rep;
    if (i == 0) rep = bps.front() - 1.0;
    else if (i == m) rep = bps.back() + 1.0;
    else rep = 0.5 * (lo + hi);

    const double a = intercept_at(rep);
    if (slope > 0.0) {
      const double root = -a / slope;
      if (root >= lo && root <= hi) return finish(root);
    } else if (a == 0.0) {
      // Flat stretch of the derivative: a closed interval of optima.
      return finish(0.5 * (lo + hi));
    }
    // Crossing at the right breakpoint: derivative <= 0 here, > 0 after it.
    // (A zero derivative after the breakpoint means a flat stretch begins
    // there; the flat-interval branch above then picks its midpoint.)
    if (i < m) {
      const double g_left = a + slope * hi;
      double rep_next;
      if (i + 1 == m) rep_next = bps.back() + 1.0;
      else rep_next = 0.5 * (bps[i] + bps[i + 1]);
      const double g_right = intercept_at(rep_next) + slope * hi;
      if (g_left <= 0.0 && g_right > 0.0) return finish(hi);
    }
  }
  throw NumericError("optimal_split failed to bracket the penalty minimum");
}

}  // namespace ordreg
