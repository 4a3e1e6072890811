#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "ordreg/rng.hpp"
#include "ordreg/tune.hpp"

namespace ordreg {

// Data-generating settings for the three benchmark scenarios. All three draw
// covariates as independent standard normals and responses from a forward
// stopping ratio model with logit link and K=2 (three classes).
struct SimScenario {
  std::string name;
  Eigen::Index n_train = 0;
  VectorXd b0;  // length 2
  MatrixXd B;   // P x 2
};

enum class Scenario { sim1, sim2, sim3 };

inline SimScenario make_scenario(Scenario which) {
  SimScenario s;
  s.b0 = VectorXd(2);
  s.b0 << -0.5, 0.0;
  switch (which) {
    case Scenario::sim1:
      s.name = "Sim1";
      s.n_train = 500;
      s.B = MatrixXd::Zero(1, 2);
      s.B(0, 1) = 2.0;
      return s;
    case Scenario::sim2:
      s.name = "Sim2";
      s.n_train = 50;
      s.B = MatrixXd::Zero(15, 2);
      s.B.topRows(5).setConstant(2.0);
      return s;
    case Scenario::sim3:
      s.name = "Sim3";
      s.n_train = 50;
      s.B = MatrixXd::Zero(15, 2);
      s.B.topRows(5).setConstant(2.0);
      s.B(0, 0) = -2.0;
      s.B(0, 1) = 2.0;
      return s;
  }
  throw ConfigError("unknown scenario");
}

inline Scenario scenario_from_name(const std::string& name) {
  if (name == "Sim1" || name == "sim1") return Scenario::sim1;
  if (name == "Sim2" || name == "sim2") return Scenario::sim2;
  if (name == "Sim3" || name == "sim3") return Scenario::sim3;
  throw ConfigError("unknown scenario '" + name + "' (expected Sim1, Sim2, or Sim3)");
}

// True class probabilities at a covariate vector.
inline VectorXd scenario_probabilities(const SimScenario& s,
                                       Eigen::Ref<const VectorXd> x) {
  const VectorXd eta = s.b0 + s.B.transpose() * x;
  return inv_link(Link::logit, Family::sratio, eta);
}

// Draws n observations (one trial each) from the scenario's model.
inline Dataset simulate_n(const SimScenario& s, Eigen::Index n, uint64_t seed) {
  const Eigen::Index p = s.B.rows();
  const Eigen::Index k = s.b0.size();
  Rng rng(seed);

  Dataset data;
  data.x.resize(n, p);
  data.y = MatrixXd::Zero(n, k + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) data.x(i, j) = rng.normal();
    const VectorXd prob = scenario_probabilities(s, data.x.row(i).transpose());
    const double u = rng.uniform();
    double cum = 0.0;
    Eigen::Index cls = k;  // class K+1 unless an earlier class absorbs u
    for (Eigen::Index j = 0; j < k; ++j) {
      cum += prob[j];
      if (u < cum) {
        cls = j;
        break;
      }
    }
    data.y(i, cls) = 1.0;
  }
  data.x_names.reserve(static_cast<size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) data.x_names.push_back("x" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j <= k; ++j) data.y_names.push_back(std::to_string(j + 1));
  return data;
}

inline Dataset simulate(const SimScenario& s, uint64_t seed) {
  return simulate_n(s, s.n_train, seed);
}

// Average per-observation log-likelihood of a fitted model over a fresh
// validation draw from the scenario.
struct OosResult {
  double mean_loglik = 0.0;
  bool any_infeasible = false;
};

inline OosResult evaluate_on(const FitModel& fit, size_t lambda_index,
                             const Dataset& valid) {
  const Prediction pred = predict(fit, lambda_index, valid.x);
  OosResult out;
  double total = 0.0;
  for (Eigen::Index i = 0; i < valid.n_obs(); ++i) {
    if (!pred.feasible[static_cast<size_t>(i)]) {
      out.any_infeasible = true;
      out.mean_loglik = -std::numeric_limits<double>::infinity();
      return out;
    }
    double ll_i = 0.0;
    for (Eigen::Index j = 0; j < valid.y.cols(); ++j) {
      if (valid.y(i, j) <= 0.0) continue;
      const double p = pred.probs(i, j);
      if (!(p > 0.0)) {
        out.any_infeasible = true;
        out.mean_loglik = -std::numeric_limits<double>::infinity();
        return out;
      }
      ll_i += valid.y(i, j) * std::log(p);
    }
    total += ll_i;
  }
  out.mean_loglik = total / static_cast<double>(valid.n_obs());
  return out;
}

inline OosResult evaluate_oos(const FitModel& fit, size_t lambda_index,
                              const SimScenario& s, Eigen::Index n_validation,
                              uint64_t seed) {
  const Dataset valid = simulate_n(s, n_validation, seed);
  return evaluate_on(fit, lambda_index, valid);
}

// One experiment: per replicate, simulate training data, fit the parallel,
// nonparallel, and semi-parallel lasso paths, tune lambda by 5-fold CV on
// mean held-out log-likelihood, and evaluate the tuned full-data fit on a
// fresh 10,000-observation draw. Reports across-replicate mean and standard
// error per model form.
struct ExperimentResult {
  std::string scenario;
  int replicates = 0;
  std::vector<std::string> forms;               // parallel, nonparallel, semiparallel
  std::vector<std::vector<double>> values;      // [form][replicate] mean oos loglik
  std::vector<double> means;
  std::vector<double> std_errors;
  std::vector<std::string> failures;            // per-replicate failure notes
};

inline ExperimentResult run_experiment(Scenario which, int replicates, uint64_t seed,
                                       int threads = 1, Eigen::Index n_validation = 10000,
                                       int n_folds = 5) {
  const SimScenario s = make_scenario(which);
  ExperimentResult out;
  out.scenario = s.name;
  out.replicates = replicates;
  out.forms = {"parallel", "nonparallel", "semiparallel"};
  out.values.assign(out.forms.size(), std::vector<double>(static_cast<size_t>(replicates), 0.0));

  std::vector<std::string> failures(static_cast<size_t>(replicates));
  detail::run_indexed(replicates, threads, [&](int rep) {
    const uint64_t rep_tag = static_cast<uint64_t>(rep);
    const uint64_t data_seed = Rng::stream_seed(seed, rep_tag * 3 + 0);
    const uint64_t fold_seed = Rng::stream_seed(seed, rep_tag * 3 + 1);
    const uint64_t valid_seed = Rng::stream_seed(seed, rep_tag * 3 + 2);

    const Dataset train = simulate(s, data_seed);
    const Dataset valid = simulate_n(s, n_validation, valid_seed);
    const FoldPlan plan = make_fold_plan(train.n_obs(), n_folds, fold_seed);

    for (size_t form = 0; form < out.forms.size(); ++form) {
      FitOptions options;
      options.spec.family = Family::sratio;
      options.spec.link = Link::logit;
      options.spec.parallel_terms = form != 1;
      options.spec.nonparallel_terms = form != 0;
      options.penalty.alpha = 1.0;
      options.penalty.rho = 1.0;
      try {
        const TuneResult tuned = kfold_tune(train, options, n_folds, fold_seed, &plan);
        const OosResult oos = evaluate_on(tuned.full_fit, tuned.best_index, valid);
        out.values[form][static_cast<size_t>(rep)] = oos.mean_loglik;
      } catch (const std::exception& err) {
        out.values[form][static_cast<size_t>(rep)] =
            -std::numeric_limits<double>::infinity();
        failures[static_cast<size_t>(rep)] =
            "replicate " + std::to_string(rep + 1) + " (" + out.forms[form] + "): " +
            err.what();
      }
    }
  });
  for (auto& f : failures) {
    if (!f.empty()) out.failures.push_back(std::move(f));
  }

  out.means.resize(out.forms.size());
  out.std_errors.resize(out.forms.size());
  for (size_t form = 0; form < out.forms.size(); ++form) {
    const auto& v = out.values[form];
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out.means[form] = mean;
    out.std_errors[form] = sd / std::sqrt(n);
  }
  return out;
}

}  // namespace ordreg
