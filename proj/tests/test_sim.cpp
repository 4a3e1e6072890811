#include <catch_amalgamated.hpp>

#include "ordreg/sim.hpp"

using namespace ordreg;
using Catch::Matchers::WithinAbs;

TEST_CASE("benchmark scenario parameters", "[sim]") {
  const SimScenario s1 = make_scenario(Scenario::sim1);
  CHECK(s1.n_train == 500);
  CHECK(s1.B.rows() == 1);
  CHECK(s1.B(0, 0) == 0.0);
  CHECK(s1.B(0, 1) == 2.0);
  CHECK(s1.b0[0] == -0.5);
  CHECK(s1.b0[1] == 0.0);

  const SimScenario s2 = make_scenario(Scenario::sim2);
  CHECK(s2.n_train == 50);
  REQUIRE(s2.B.rows() == 15);
  CHECK(s2.B.topRows(5).minCoeff() == 2.0);
  CHECK(s2.B.bottomRows(10).cwiseAbs().maxCoeff() == 0.0);

  const SimScenario s3 = make_scenario(Scenario::sim3);
  CHECK(s3.B(0, 0) == -2.0);
  CHECK(s3.B(0, 1) == 2.0);
  CHECK(s3.B.block(1, 0, 4, 2).minCoeff() == 2.0);
  CHECK(s3.B.bottomRows(10).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("class probabilities at the origin", "[sim]") {
  const SimScenario s = make_scenario(Scenario::sim1);
  const VectorXd p = scenario_probabilities(s, VectorXd::Zero(1));
  CHECK_THAT(p[0], WithinAbs(0.37754066879814546, 1e-10));
  CHECK_THAT(p[1], WithinAbs(0.31122966560092727, 1e-10));
  CHECK_THAT(1.0 - p.sum(), WithinAbs(0.31122966560092727, 1e-10));
}

TEST_CASE("simulation draws are deterministic given the seed", "[sim]") {
  const SimScenario s = make_scenario(Scenario::sim2);
  const Dataset a = simulate(s, 1234);
  const Dataset b = simulate(s, 1234);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
  const Dataset c = simulate(s, 1235);
  CHECK((a.x - c.x).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("empirical class frequencies match the model", "[sim][property]") {
  // Hold x fixed by drawing classes directly from the class distribution at a
  // chosen covariate value.
  const SimScenario s = make_scenario(Scenario::sim1);
  VectorXd x(1);
  x << 0.7;
  const VectorXd p = scenario_probabilities(s, x);
  VectorXd full(3);
  full << p[0], p[1], 1.0 - p.sum();

  Rng rng(5);
  const int n = 1000000;
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    if (u < full[0]) counts[0] += 1;
    else if (u < full[0] + full[1]) counts[1] += 1;
    else counts[2] += 1;
  }
  for (int j = 0; j < 3; ++j) {
    const double freq = counts[j] / n;
    const double sigma = std::sqrt(full[j] * (1.0 - full[j]) / n);
    REQUIRE(std::abs(freq - full[j]) < 3.0 * sigma + 1e-9);
  }
}

TEST_CASE("out-of-sample evaluation favors the true parameters",
          "[sim][property]") {
  const SimScenario s = make_scenario(Scenario::sim1);

  // A model object holding the true coefficients.
  FitModel truth;
  truth.spec = ModelSpec{Family::sratio, false, Link::logit, false, true};
  truth.n_obs = s.n_train;
  truth.n_covariates = 1;
  truth.n_predictors = 2;
  truth.n_star = static_cast<double>(s.n_train);
  truth.scales = VectorXd::Ones(1);
  truth.zero_variance = {false};
  truth.x_names = {"x1"};
  truth.y_names = {"1", "2", "3"};
  PathEntry entry;
  entry.lambda = 0.0;
  entry.coef.b0 = s.b0;
  entry.coef.B = s.B;
  entry.n_nonzero = 3;
  truth.path.push_back(entry);

  // A lasso fit on a small training draw.
  FitOptions options;
  options.spec = ModelSpec{Family::sratio, false, Link::logit, true, false};
  const Dataset train = simulate_n(s, 80, 31);
  const TuneResult tuned = kfold_tune(train, options, 5, 7);

  const Dataset valid = simulate_n(s, 20000, 99);
  const OosResult v_truth = evaluate_on(truth, 0, valid);
  const OosResult v_fit = evaluate_on(tuned.full_fit, tuned.best_index, valid);
  CHECK_FALSE(v_truth.any_infeasible);
  CHECK(v_truth.mean_loglik > v_fit.mean_loglik);

  SECTION("evaluate_oos draws its own validation set deterministically") {
    const OosResult a = evaluate_oos(truth, 0, s, 5000, 11);
    const OosResult b = evaluate_oos(truth, 0, s, 5000, 11);
    CHECK(a.mean_loglik == b.mean_loglik);
  }
}

TEST_CASE("experiments are deterministic and ordered sensibly", "[sim]") {
  const ExperimentResult a = run_experiment(Scenario::sim2, 3, 17);
  const ExperimentResult b = run_experiment(Scenario::sim2, 3, 17);
  REQUIRE(a.forms.size() == 3);
  for (size_t f = 0; f < 3; ++f) {
    CHECK(a.means[f] == b.means[f]);
    CHECK(a.std_errors[f] == b.std_errors[f]);
    CHECK(a.means[f] < 0.0);
    CHECK(a.means[f] > -2.0);  // sane range for a 3-class problem
  }
  CHECK(a.failures.empty());

  SECTION("threaded runs agree with sequential runs") {
    const ExperimentResult c = run_experiment(Scenario::sim2, 3, 17, 3);
    for (size_t f = 0; f < 3; ++f) {
      CHECK(a.means[f] == c.means[f]);
    }
  }
}
