#include <catch_amalgamated.hpp>

#include "ordreg/model.hpp"
#include "ordreg/optim.hpp"
#include "ordreg/rng.hpp"

using namespace ordreg;
using Catch::Matchers::WithinAbs;

namespace {

const Link kLinks[] = {Link::logit, Link::probit, Link::cloglog, Link::cauchit};
const Family kFamilies[] = {Family::cumulative, Family::sratio, Family::cratio,
                            Family::acat};

Dataset toy_dataset(Eigen::Index n, Eigen::Index p, Eigen::Index k, uint64_t seed,
                    double n_max = 1.0) {
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, p);
  data.y = MatrixXd::Zero(n, k + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) data.x(i, j) = rng.normal();
    const Eigen::Index cls = static_cast<Eigen::Index>(rng.next_u64() % (k + 1));
    const double trials = n_max > 1.0 ? 1.0 + std::floor(rng.uniform() * n_max) : 1.0;
    data.y(i, cls) = trials;
  }
  for (Eigen::Index j = 0; j < p; ++j) data.x_names.push_back("x" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j <= k; ++j) data.y_names.push_back(std::to_string(j + 1));
  return data;
}

// Draws coefficients that keep cumulative-family probabilities feasible.
Coefficients random_coef(const ModelSpec& spec, const CoefLayout& lay, Rng& rng,
                         double scale) {
  VectorXd beta(lay.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) beta[j] = scale * rng.normal();
  if (spec.family == Family::cumulative) {
    for (Eigen::Index j = 0; j < lay.k; ++j) beta[j] = -1.5 + 3.0 * j / std::max<Eigen::Index>(1, lay.k - 1);
    for (Eigen::Index j = lay.k; j < beta.size(); ++j) beta[j] *= 0.2;
  }
  return Coefficients::unflatten(lay, beta);
}

}  // namespace

TEST_CASE("linear predictors from the coefficient blocks", "[model]") {
  SECTION("parallel") {
    Coefficients coef;
    coef.b0 = VectorXd(2);
    coef.b0 << -0.5, 0.0;
    coef.b = VectorXd(1);
    coef.b << 1.0;
    VectorXd x(1);
    x << 2.0;
    const VectorXd eta = linear_predictors(coef, x);
    CHECK_THAT(eta[0], WithinAbs(1.5, 1e-15));
    CHECK_THAT(eta[1], WithinAbs(2.0, 1e-15));
  }
  SECTION("nonparallel") {
    Coefficients coef;
    coef.b0 = VectorXd::Zero(2);
    coef.B = MatrixXd(1, 2);
    coef.B << 1.0, -1.0;
    VectorXd x(1);
    x << 3.0;
    const VectorXd eta = linear_predictors(coef, x);
    CHECK_THAT(eta[0], WithinAbs(3.0, 1e-15));
    CHECK_THAT(eta[1], WithinAbs(-3.0, 1e-15));
  }
  SECTION("semi-parallel") {
    Coefficients coef;
    coef.b0 = VectorXd::Zero(2);
    coef.b = VectorXd(1);
    coef.b << 1.0;
    coef.B = MatrixXd(1, 2);
    coef.B << 0.5, -0.5;
    VectorXd x(1);
    x << 2.0;
    const VectorXd eta = linear_predictors(coef, x);
    CHECK_THAT(eta[0], WithinAbs(3.0, 1e-15));
    CHECK_THAT(eta[1], WithinAbs(1.0, 1e-15));
  }
}

TEST_CASE("coefficient layout and flattening", "[model]") {
  // Q = P+K (parallel), PK+K (nonparallel), P(K+1)+K (semi-parallel)
  const Eigen::Index p = 4, k = 3;
  CHECK(CoefLayout{p, k, true, false}.size() == p + k);
  CHECK(CoefLayout{p, k, false, true}.size() == p * k + k);
  CHECK(CoefLayout{p, k, true, true}.size() == p * (k + 1) + k);

  const CoefLayout lay{p, k, true, true};
  Rng rng(3);
  VectorXd beta(lay.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) beta[j] = rng.normal();
  const Coefficients coef = Coefficients::unflatten(lay, beta);
  CHECK((coef.flatten(lay) - beta).cwiseAbs().maxCoeff() == 0.0);
  // block order: b0, b, then columns of B
  CHECK(coef.b0[0] == beta[0]);
  CHECK(coef.b[0] == beta[k]);
  CHECK(coef.B(0, 0) == beta[k + p]);
  CHECK(coef.B(0, 1) == beta[k + 2 * p]);
}

TEST_CASE("log-likelihood values", "[model]") {
  ModelSpec spec{Family::cumulative, false, Link::logit, true, false};
  // One observation with p = (0.5, 0.25, 0.25) via monotone intercepts.
  Dataset data;
  data.x.resize(1, 0);
  data.y.resize(1, 3);
  data.y << 1, 0, 0;
  Coefficients coef;
  coef.b0 = VectorXd(2);
  coef.b0 << 0.0, link_fun(Link::logit, 0.75);
  coef.b = VectorXd(0);
  CHECK_THAT(log_likelihood(spec, coef, data), WithinAbs(std::log(0.5), 1e-12));

  SECTION("grouped rows equal the sum of ungrouped copies") {
    Dataset grouped = data;
    grouped.y << 1, 1, 0;
    Dataset split;
    split.x.resize(2, 0);
    split.y.resize(2, 3);
    split.y << 1, 0, 0, 0, 1, 0;
    CHECK_THAT(log_likelihood(spec, coef, grouped),
               WithinAbs(log_likelihood(spec, coef, split), 1e-12));
  }
}

TEST_CASE("intercept-only fit lands on the empirical frequencies", "[model]") {
  Dataset data;
  data.x.resize(1, 0);
  data.y.resize(1, 3);
  data.y << 10, 5, 5;
  ModelSpec spec{Family::cumulative, false, Link::logit, true, false};
  Controls ctl;
  ctl.thresh_out = ctl.thresh_in = 1e-12;
  const CoefLayout lay = layout_for(spec, 0, 2);
  const PenaltyConfig pen = make_penalty_config(lay, 1.0, 1.0, 0.01);
  const SingleFit fit = fit_null_model(spec, data, pen, ctl);
  const double expected = 10 * std::log(0.5) + 5 * std::log(0.25) + 5 * std::log(0.25);
  CHECK_THAT(fit.loglik, WithinAbs(expected, 1e-8));

  // stationarity of the intercept components
  const VectorXd u = score(spec, fit.coef, data);
  CHECK(u.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("score matches finite differences of the log-likelihood",
          "[model][property]") {
  Rng rng(99);
  const Dataset data = toy_dataset(25, 3, 2, 17, 3.0);
  for (Family family : kFamilies) {
    for (Link link : kLinks) {
      for (int form = 0; form < 3; ++form) {
        ModelSpec spec{family, false, link, form != 1, form != 0};
        const CoefLayout lay = layout_for(spec, 3, 2);
        const Coefficients coef = random_coef(spec, lay, rng, 0.25);
        const VectorXd beta = coef.flatten(lay);
        const VectorXd u = score(spec, coef, data);
        const double h = 1e-6;
        for (Eigen::Index j = 0; j < beta.size(); ++j) {
          VectorXd bp = beta, bm = beta;
          bp[j] += h;
          bm[j] -= h;
          const double fd =
              (log_likelihood(spec, Coefficients::unflatten(lay, bp), data) -
               log_likelihood(spec, Coefficients::unflatten(lay, bm), data)) /
              (2.0 * h);
          REQUIRE(std::abs(fd - u[j]) / std::max(1.0, std::abs(u[j])) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("score reduces to the binomial logistic score for K=1",
          "[model]") {
  const Dataset data = toy_dataset(40, 1, 1, 23);
  ModelSpec spec{Family::cumulative, false, Link::logit, true, false};
  const CoefLayout lay = layout_for(spec, 1, 1);
  VectorXd beta(2);
  beta << 0.2, -0.4;
  const Coefficients coef = Coefficients::unflatten(lay, beta);

  const VectorXd u = score(spec, coef, data);
  double u0 = 0.0, u1 = 0.0;
  for (Eigen::Index i = 0; i < data.n_obs(); ++i) {
    const double eta = beta[0] + beta[1] * data.x(i, 0);
    const double p = link_inv(Link::logit, eta);
    const double resid = data.y(i, 0) - data.trials(i) * p;
    u0 += resid;
    u1 += data.x(i, 0) * resid;
  }
  CHECK_THAT(u[0], WithinAbs(u0, 1e-9));
  CHECK_THAT(u[1], WithinAbs(u1, 1e-9));
}

TEST_CASE("Fisher information", "[model]") {
  const Dataset data = toy_dataset(30, 2, 2, 5, 2.0);
  ModelSpec spec{Family::sratio, false, Link::probit, true, true};
  const CoefLayout lay = layout_for(spec, 2, 2);
  Rng rng(8);
  const Coefficients coef = random_coef(spec, lay, rng, 0.3);
  const MatrixXd info = fisher_information(spec, coef, data, 1e-8);

  SECTION("symmetric and positive semidefinite") {
    CHECK((info - info.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(info);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
  }

  SECTION("additive over observations") {
    Dataset doubled;
    doubled.x.resize(60, 2);
    doubled.y.resize(60, 3);
    doubled.x << data.x, data.x;
    doubled.y << data.y, data.y;
    const MatrixXd info2 = fisher_information(spec, coef, doubled, 1e-8);
    CHECK((info2 - 2.0 * info).cwiseAbs().maxCoeff() < 1e-9);
  }

  SECTION("K=1 logistic reduction: sum n p(1-p) xx'") {
    const Dataset bin = toy_dataset(25, 1, 1, 31, 4.0);
    ModelSpec lspec{Family::cumulative, false, Link::logit, true, false};
    VectorXd beta(2);
    beta << -0.1, 0.6;
    const Coefficients bcoef = Coefficients::unflatten(layout_for(lspec, 1, 1), beta);
    const MatrixXd got = fisher_information(lspec, bcoef, bin, 1e-8);
    MatrixXd expected = MatrixXd::Zero(2, 2);
    for (Eigen::Index i = 0; i < bin.n_obs(); ++i) {
      const double p = link_inv(Link::logit, beta[0] + beta[1] * bin.x(i, 0));
      Eigen::Vector2d xt(1.0, bin.x(i, 0));
      expected += bin.trials(i) * p * (1.0 - p) * xt * xt.transpose();
    }
    CHECK((got - expected).cwiseAbs().maxCoeff() / expected.norm() < 1e-9);
  }
}

TEST_CASE("standardize", "[model]") {
  SECTION("unit-variance column is left alone") {
    Dataset data;
    data.x.resize(4, 1);
    data.x << 1, -1, 1, -1;
    data.y = MatrixXd::Ones(4, 2);
    const Standardization s = standardize(data);
    CHECK_THAT(s.scales[0], WithinAbs(1.0, 1e-14));
    CHECK_FALSE(s.zero_variance[0]);
    CHECK((s.data.x - data.x).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("constant column is flagged and unscaled") {
    Dataset data;
    data.x.resize(3, 2);
    data.x << 2, 1, 2, -1, 2, 0.5;
    data.y = MatrixXd::Ones(3, 2);
    const Standardization s = standardize(data);
    CHECK(s.zero_variance[0]);
    CHECK_FALSE(s.zero_variance[1]);
    CHECK_THAT(s.scales[0], WithinAbs(1.0, 1e-14));
  }
  SECTION("scales are weighted by trial counts") {
    Dataset grouped;
    grouped.x.resize(2, 1);
    grouped.x << 1.0, -2.0;
    grouped.y.resize(2, 2);
    grouped.y << 3, 0, 0, 1;
    Dataset split;
    split.x.resize(4, 1);
    split.x << 1.0, 1.0, 1.0, -2.0;
    split.y.resize(4, 2);
    split.y << 1, 0, 1, 0, 1, 0, 0, 1;
    CHECK_THAT(standardize(grouped).scales[0],
               WithinAbs(standardize(split).scales[0], 1e-14));
  }
}

TEST_CASE("back-transform inverts the covariate scaling", "[model]") {
  Rng rng(12);
  const Dataset data = toy_dataset(20, 3, 2, 44);
  const Standardization s = standardize(data);
  ModelSpec spec{Family::sratio, false, Link::logit, true, true};
  const CoefLayout lay = layout_for(spec, 3, 2);
  const Coefficients scaled = random_coef(spec, lay, rng, 0.5);
  const Coefficients orig = unstandardize(scaled, s.scales);
  for (Eigen::Index i = 0; i < data.n_obs(); ++i) {
    const VectorXd eta_scaled =
        linear_predictors(scaled, s.data.x.row(i).transpose());
    const VectorXd eta_orig = linear_predictors(orig, data.x.row(i).transpose());
    REQUIRE((eta_scaled - eta_orig).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("dataset validation", "[model]") {
  Dataset data = toy_dataset(5, 2, 1, 9);
  data.y(2, 0) = data.y(2, 1) = 0.0;
  CHECK_THROWS_AS(data.validate(), DataError);
  data = toy_dataset(5, 2, 1, 9);
  data.x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(data.validate(), DataError);
}
