#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "ordreg/fit.hpp"
#include "ordreg/rng.hpp"

namespace ordreg {

// Disjoint, exhaustive observation index sets (0-based).
struct FoldPlan {
  std::vector<std::vector<Eigen::Index>> folds;

  void validate(Eigen::Index n_obs) const {
    if (folds.size() < 2) throw ConfigError("need at least 2 folds");
    std::vector<char> seen(static_cast<size_t>(n_obs), 0);
    for (const auto& fold : folds) {
      if (fold.empty()) throw ConfigError("empty cross-validation fold");
      for (Eigen::Index i : fold) {
        if (i < 0 || i >= n_obs) throw ConfigError("fold index out of range");
        if (seen[static_cast<size_t>(i)]) throw ConfigError("fold index repeated");
        seen[static_cast<size_t>(i)] = 1;
      }
    }
    for (char s : seen) {
      if (!s) throw ConfigError("fold plan does not cover every observation");
    }
  }
};

// Random folds: shuffled indices dealt round-robin. With stratify=true the
// deal is done within each observed (argmax) response class.
inline FoldPlan make_fold_plan(Eigen::Index n_obs, int n_folds, uint64_t seed,
                               bool stratify = false, const MatrixXd* y = nullptr) {
  if (n_folds < 2) throw ConfigError("need at least 2 folds");
  if (n_folds > n_obs) throw ConfigError("more folds than observations");
  Rng rng(seed);
  FoldPlan plan;
  plan.folds.assign(static_cast<size_t>(n_folds), {});

  auto deal = [&](std::vector<Eigen::Index>& idx, size_t start_fold) {
    rng.shuffle(idx);
    for (size_t i = 0; i < idx.size(); ++i) {
      plan.folds[(start_fold + i) % static_cast<size_t>(n_folds)].push_back(idx[i]);
    }
    return (start_fold + idx.size()) % static_cast<size_t>(n_folds);
  };

  if (stratify && y != nullptr) {
    std::vector<std::vector<Eigen::Index>> by_class(static_cast<size_t>(y->cols()));
    for (Eigen::Index i = 0; i < n_obs; ++i) {
      Eigen::Index cls = 0;
      for (Eigen::Index j = 1; j < y->cols(); ++j) {
        if ((*y)(i, j) > (*y)(i, cls)) cls = j;
      }
      by_class[static_cast<size_t>(cls)].push_back(i);
    }
    size_t next = 0;
    for (auto& idx : by_class) next = deal(idx, next);
  } else {
    std::vector<Eigen::Index> idx(static_cast<size_t>(n_obs));
    std::iota(idx.begin(), idx.end(), 0);
    deal(idx, 0);
  }
  for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
  plan.validate(n_obs);
  return plan;
}

// Fraction of held-out trials whose observed class differs from the argmax
// predicted class (ties broken toward the lowest class index).
inline double misclassification_rate(const MatrixXd& probs, const MatrixXd& y) {
  if (probs.rows() != y.rows() || probs.cols() != y.cols()) {
    throw DataError("probability and count matrices have different shapes");
  }
  double wrong = 0.0, total = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < probs.cols(); ++j) {
      if (probs(i, j) > probs(i, best)) best = j;
    }
    const double n_i = y.row(i).sum();
    wrong += n_i - y(i, best);
    total += n_i;
  }
  return total > 0.0 ? wrong / total : 0.0;
}

struct SummaryRow {
  double lambda = 0.0;
  Eigen::Index n_nonzero = 0;
  double loglik = 0.0;
  double dev_pct = 0.0;
  double aic = 0.0;
  double bic = 0.0;
};

inline SummaryRow make_summary_row(double lambda, double loglik, Eigen::Index n_nonzero,
                                   Eigen::Index n_obs, double loglik_null) {
  SummaryRow row;
  row.lambda = lambda;
  row.loglik = loglik;
  row.n_nonzero = n_nonzero;
  row.dev_pct = 1.0 - loglik / loglik_null;
  row.aic = -2.0 * loglik + 2.0 * static_cast<double>(n_nonzero);
  row.bic = -2.0 * loglik +
            std::log(static_cast<double>(n_obs)) * static_cast<double>(n_nonzero);
  return row;
}

inline std::vector<SummaryRow> path_summary(const FitModel& fit) {
  std::vector<SummaryRow> rows;
  rows.reserve(fit.path.size());
  for (const PathEntry& entry : fit.path) {
    rows.push_back(make_summary_row(entry.lambda, entry.loglik, entry.n_nonzero,
                                    fit.n_obs, fit.loglik_null));
  }
  return rows;
}

namespace detail {

inline void run_indexed(int n_tasks, int threads, const std::function<void(int)>& task) {
  if (threads <= 1 || n_tasks <= 1) {
    for (int t = 0; t < n_tasks; ++t) task(t);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  const int n_workers = std::min(threads, n_tasks);
  pool.reserve(static_cast<size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) task(t);
    });
  }
  for (auto& th : pool) th.join();
}

inline std::vector<Eigen::Index> complement_rows(Eigen::Index n_obs,
                                                 const std::vector<Eigen::Index>& fold) {
  std::vector<char> held(static_cast<size_t>(n_obs), 0);
  for (Eigen::Index i : fold) held[static_cast<size_t>(i)] = 1;
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<size_t>(n_obs) - fold.size());
  for (Eigen::Index i = 0; i < n_obs; ++i) {
    if (!held[static_cast<size_t>(i)]) rows.push_back(i);
  }
  return rows;
}

inline void warn_missing_categories(const Dataset& train, size_t fold_index,
                                    std::vector<std::string>& warnings) {
  const Eigen::RowVectorXd totals = train.y.colwise().sum();
  for (Eigen::Index j = 0; j < totals.size(); ++j) {
    if (totals[j] <= 0.0) {
      warnings.push_back("training portion of fold " + std::to_string(fold_index + 1) +
                         " has no trials in response category " + std::to_string(j + 1));
    }
  }
}

}  // namespace detail

// K-fold out-of-sample performance over the lambda sequence of the full-data
// fit. Held-out log-likelihoods are totals per fold; per-trial means are also
// provided. Infeasible held-out predictions make a cell -inf.
struct TuneResult {
  FitModel full_fit;
  FoldPlan plan;
  std::vector<double> lambdas;
  MatrixXd loglik;           // nLambda x nFolds, fold totals
  MatrixXd loglik_per_trial; // nLambda x nFolds
  MatrixXd misclass;         // nLambda x nFolds
  size_t best_index = 0;     // argmax of mean held-out loglik across folds
  std::vector<std::string> warnings;
};

inline TuneResult kfold_tune(const Dataset& data, const FitOptions& options, int n_folds,
                             uint64_t fold_seed, const FoldPlan* user_plan = nullptr,
                             int threads = 1) {
  TuneResult out;
  out.full_fit = fit_model(data, options);
  out.lambdas.reserve(out.full_fit.path.size());
  for (const PathEntry& entry : out.full_fit.path) out.lambdas.push_back(entry.lambda);

  out.plan = user_plan != nullptr
                 ? *user_plan
                 : make_fold_plan(data.n_obs(), n_folds, fold_seed, false, &data.y);
  out.plan.validate(data.n_obs());
  const int f_count = static_cast<int>(out.plan.folds.size());

  const Eigen::Index n_lambda = static_cast<Eigen::Index>(out.lambdas.size());
  out.loglik.resize(n_lambda, f_count);
  out.loglik_per_trial.resize(n_lambda, f_count);
  out.misclass.resize(n_lambda, f_count);

  FitOptions fold_options = options;
  fold_options.lambda_values = out.lambdas;

  std::vector<std::vector<std::string>> fold_warnings(static_cast<size_t>(f_count));
  detail::run_indexed(f_count, threads, [&](int f) {
    const auto& held = out.plan.folds[static_cast<size_t>(f)];
    const Dataset train =
        subset_rows(data, detail::complement_rows(data.n_obs(), held));
    const Dataset test = subset_rows(data, held);
    detail::warn_missing_categories(train, static_cast<size_t>(f),
                                    fold_warnings[static_cast<size_t>(f)]);
    const FitModel fold_fit = fit_model(train, fold_options);
    const double test_trials = test.total_trials();
    for (Eigen::Index m = 0; m < n_lambda; ++m) {
      const double ll = heldout_loglik(fold_fit, static_cast<size_t>(m), test.x, test.y);
      out.loglik(m, f) = ll;
      out.loglik_per_trial(m, f) = ll / test_trials;
      const Prediction pred = predict(fold_fit, static_cast<size_t>(m), test.x);
      out.misclass(m, f) = misclassification_rate(pred.probs, test.y);
    }
  });
  for (auto& w : fold_warnings) {
    out.warnings.insert(out.warnings.end(), w.begin(), w.end());
  }

  out.best_index = 0;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; m < n_lambda; ++m) {
    const double mean = out.loglik.row(m).mean();
    if (mean > best_mean) {
      best_mean = mean;
      out.best_index = static_cast<size_t>(m);
    }
  }
  return out;
}

// Nested cross-validation: lambda is tuned by inner CV within each outer
// training portion (using the lambda sequence of the full-data fit), then the
// tuned model is scored on the held-out fold.
struct CvFoldResult {
  size_t best_lambda_index = 0;
  double loglik = 0.0;            // held-out fold total
  double loglik_per_trial = 0.0;
  double misclass = 0.0;
};

struct CvResult {
  FitModel full_fit;
  FoldPlan plan;
  std::vector<double> lambdas;
  std::vector<CvFoldResult> folds;
  std::vector<std::string> warnings;
};

inline CvResult kfold_cv(const Dataset& data, const FitOptions& options, int n_folds,
                         int n_folds_cv, uint64_t seed,
                         const FoldPlan* user_plan = nullptr, int threads = 1) {
  CvResult out;
  out.full_fit = fit_model(data, options);
  for (const PathEntry& entry : out.full_fit.path) out.lambdas.push_back(entry.lambda);

  out.plan = user_plan != nullptr
                 ? *user_plan
                 : make_fold_plan(data.n_obs(), n_folds, Rng::stream_seed(seed, 0), false,
                                  &data.y);
  out.plan.validate(data.n_obs());
  const int f_count = static_cast<int>(out.plan.folds.size());
  out.folds.assign(static_cast<size_t>(f_count), {});

  FitOptions inner_options = options;
  inner_options.lambda_values = out.lambdas;

  std::vector<std::vector<std::string>> fold_warnings(static_cast<size_t>(f_count));
  detail::run_indexed(f_count, threads, [&](int f) {
    const auto& held = out.plan.folds[static_cast<size_t>(f)];
    const Dataset train =
        subset_rows(data, detail::complement_rows(data.n_obs(), held));
    const Dataset test = subset_rows(data, held);
    detail::warn_missing_categories(train, static_cast<size_t>(f),
                                    fold_warnings[static_cast<size_t>(f)]);

    const TuneResult inner =
        kfold_tune(train, inner_options, n_folds_cv,
                   Rng::stream_seed(seed, static_cast<uint64_t>(f) + 1));
    CvFoldResult& res = out.folds[static_cast<size_t>(f)];
    res.best_lambda_index = inner.best_index;
    res.loglik = heldout_loglik(inner.full_fit, inner.best_index, test.x, test.y);
    res.loglik_per_trial = res.loglik / test.total_trials();
    const Prediction pred = predict(inner.full_fit, inner.best_index, test.x);
    res.misclass = misclassification_rate(pred.probs, test.y);
    for (const auto& w : inner.warnings) {
      fold_warnings[static_cast<size_t>(f)].push_back("inner CV of fold " +
                                                      std::to_string(f + 1) + ": " + w);
    }
  });
  for (auto& w : fold_warnings) {
    out.warnings.insert(out.warnings.end(), w.begin(), w.end());
  }
  return out;
}

}  // namespace ordreg
