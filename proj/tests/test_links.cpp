#include <catch_amalgamated.hpp>

#include "ordreg/links.hpp"
#include "ordreg/rng.hpp"

using namespace ordreg;
using Catch::Matchers::WithinAbs;

namespace {

const Link kLinks[] = {Link::logit, Link::probit, Link::cloglog, Link::cauchit};
const Family kFamilies[] = {Family::cumulative, Family::sratio, Family::cratio,
                            Family::acat};

VectorXd random_interior(Eigen::Index k, Rng& rng) {
  // Dirichlet-ish draw bounded away from the simplex boundary.
  VectorXd w(k + 1);
  for (Eigen::Index j = 0; j <= k; ++j) w[j] = 0.05 + rng.uniform();
  w /= w.sum();
  return w.head(k);
}

MatrixXd fd_family_jacobian(Family family, const VectorXd& delta, double h = 1e-6) {
  const Eigen::Index k = delta.size();
  MatrixXd jac(k, k);
  for (Eigen::Index n = 0; n < k; ++n) {
    VectorXd dp = delta, dm = delta;
    dp[n] += h;
    dm[n] -= h;
    jac.col(n) = (family_inv(family, dp) - family_inv(family, dm)) / (2.0 * h);
  }
  return jac;
}

MatrixXd fd_composite_jacobian(Link link, Family family, const VectorXd& eta,
                               double h = 1e-6) {
  const Eigen::Index k = eta.size();
  MatrixXd jac(k, k);
  for (Eigen::Index n = 0; n < k; ++n) {
    VectorXd ep = eta, em = eta;
    ep[n] += h;
    em[n] -= h;
    jac.col(n) = (inv_link(link, family, ep) - inv_link(link, family, em)) / (2.0 * h);
  }
  return jac;
}

VectorXd cumulative_sums(const VectorXd& p) {
  VectorXd g(p.size());
  double cum = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    cum += p[j];
    g[j] = cum;
  }
  return g;
}

}  // namespace

TEST_CASE("elementwise links invert and differentiate", "[links]") {
  for (Link link : kLinks) {
    for (double d = 0.02; d < 1.0; d += 0.02) {
      const double eta = link_fun(link, d);
      REQUIRE_THAT(link_inv(link, eta), WithinAbs(d, 1e-12));
      REQUIRE(link_inv_deriv(link, eta) > 0.0);
    }
    // strictly increasing over the range where the inverse is resolvable in
    // doubles (cloglog hits 1.0 exactly beyond eta ~ 3.6)
    const double hi = link == Link::cloglog ? 3.0 : 8.0;
    double prev = link_inv(link, -8.0);
    for (double eta = -7.5; eta <= hi; eta += 0.5) {
      const double cur = link_inv(link, eta);
      REQUIRE(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("logit and probit are symmetric, cloglog is not", "[links]") {
  for (double d = 0.05; d < 1.0; d += 0.05) {
    REQUIRE_THAT(link_fun(Link::logit, d) + link_fun(Link::logit, 1.0 - d),
                 WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(link_fun(Link::probit, d) + link_fun(Link::probit, 1.0 - d),
                 WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(link_fun(Link::cauchit, d) + link_fun(Link::cauchit, 1.0 - d),
                 WithinAbs(0.0, 1e-12));
  }
  REQUIRE(std::abs(link_fun(Link::cloglog, 0.3) + link_fun(Link::cloglog, 0.7)) > 0.1);
}

TEST_CASE("family maps match their conditional-probability definitions", "[links]") {
  VectorXd p(2);
  p << 0.2, 0.3;

  VectorXd d = family_fun(Family::cumulative, p);
  CHECK_THAT(d[0], WithinAbs(0.2, 1e-15));
  CHECK_THAT(d[1], WithinAbs(0.5, 1e-15));

  d = family_fun(Family::sratio, p);
  CHECK_THAT(d[0], WithinAbs(0.2, 1e-15));
  CHECK_THAT(d[1], WithinAbs(0.375, 1e-15));  // 0.3 / (1 - 0.2)

  d = family_fun(Family::acat, p);  // p3 = 0.5
  CHECK_THAT(d[0], WithinAbs(0.6, 1e-15));    // 0.3 / (0.2 + 0.3)
  CHECK_THAT(d[1], WithinAbs(0.625, 1e-15));  // 0.5 / (0.3 + 0.5)

  d = family_fun(Family::cratio, p);
  CHECK_THAT(d[0], WithinAbs(0.8, 1e-15));
  CHECK_THAT(d[1], WithinAbs(0.625, 1e-15));

  VectorXd bad(2);
  bad << -0.1, 0.5;
  CHECK_THROWS_AS(family_fun(Family::sratio, bad), DataError);
  bad << 0.6, 0.5;
  CHECK_THROWS_AS(family_fun(Family::sratio, bad), DataError);
}

TEST_CASE("family inverses recover probabilities", "[links]") {
  VectorXd d(2);
  d << 0.2, 0.5;
  VectorXd p = family_inv(Family::cumulative, d);
  CHECK_THAT(p[0], WithinAbs(0.2, 1e-15));
  CHECK_THAT(p[1], WithinAbs(0.3, 1e-15));

  d << 0.5, 0.5;
  p = family_inv(Family::sratio, d);
  CHECK_THAT(p[0], WithinAbs(0.5, 1e-15));
  CHECK_THAT(p[1], WithinAbs(0.25, 1e-15));

  p = family_inv(Family::acat, d);  // unit odds ratios: all classes equal
  CHECK_THAT(p[0], WithinAbs(1.0 / 3.0, 1e-12));
  CHECK_THAT(p[1], WithinAbs(1.0 / 3.0, 1e-12));

  VectorXd decreasing(2);
  decreasing << 0.5, 0.2;
  CHECK_THROWS_AS(family_inv(Family::cumulative, decreasing), InfeasibleError);
}

TEST_CASE("family inverse Jacobians", "[links]") {
  SECTION("cumulative is bidiagonal with +-1") {
    VectorXd d(3);
    d << 0.1, 0.4, 0.7;
    const MatrixXd jac = family_inv_jacobian(Family::cumulative, d);
    MatrixXd expected = MatrixXd::Identity(3, 3);
    expected(1, 0) = expected(2, 1) = -1.0;
    CHECK((jac - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("sratio matches finite differences") {
    VectorXd d(2);
    d << 0.5, 0.5;
    const MatrixXd jac = family_inv_jacobian(Family::sratio, d);
    CHECK((jac - fd_family_jacobian(Family::sratio, d)).cwiseAbs().maxCoeff() < 1e-8);
  }
  SECTION("cratio is the negated sratio Jacobian at 1-delta") {
    VectorXd d(3);
    d << 0.3, 0.6, 0.45;
    const MatrixXd lhs = family_inv_jacobian(Family::cratio, d);
    const MatrixXd rhs =
        -family_inv_jacobian(Family::sratio, (VectorXd::Ones(3) - d).eval());
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
    CHECK((lhs - fd_family_jacobian(Family::cratio, d)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("composite inverse link", "[links]") {
  VectorXd eta(2);
  eta << 0.0, 1.0;
  const VectorXd p = inv_link(Link::logit, Family::cumulative, eta);
  CHECK_THAT(p[0], WithinAbs(0.5, 1e-10));
  CHECK_THAT(p[1], WithinAbs(0.7310585786300049 - 0.5, 1e-10));

  VectorXd decreasing(2);
  decreasing << 1.0, 0.0;
  CHECK_THROWS_AS(inv_link(Link::logit, Family::cumulative, decreasing), InfeasibleError);
  const InvLinkResult unchecked =
      inv_link_unchecked(Link::logit, Family::cumulative, decreasing);
  CHECK_FALSE(unchecked.feasible);
}

TEST_CASE("composite Jacobian: univariate chain rule and finite differences",
          "[links]") {
  // K=1 with logit: |dh/deta| = delta (1-delta); the sign flips for the
  // families whose delta decreases in the class-1 direction.
  VectorXd eta1(1);
  eta1 << 0.37;
  const double delta = link_inv(Link::logit, eta1[0]);
  for (Family family : kFamilies) {
    const double got = inv_link_jacobian(Link::logit, family, eta1)(0, 0);
    const double expected =
        (family == Family::cratio || family == Family::acat) ? -delta * (1.0 - delta)
                                                             : delta * (1.0 - delta);
    CHECK_THAT(got, WithinAbs(expected, 1e-12));
  }

  VectorXd eta(2);
  eta << 0.0, 1.0;
  MatrixXd jac = inv_link_jacobian(Link::logit, Family::cumulative, eta);
  CHECK((jac - fd_composite_jacobian(Link::logit, Family::cumulative, eta))
            .cwiseAbs()
            .maxCoeff() < 1e-8);

  eta << 0.3, -0.2;
  jac = inv_link_jacobian(Link::probit, Family::sratio, eta);
  CHECK((jac - fd_composite_jacobian(Link::probit, Family::sratio, eta))
            .cwiseAbs()
            .maxCoeff() < 1e-8);
}

TEST_CASE("category reversal", "[links]") {
  VectorXd counts(3);
  counts << 2, 0, 1;
  const VectorXd rev = reverse_counts(counts);
  CHECK(rev[0] == 1.0);
  CHECK(rev[1] == 0.0);
  CHECK(rev[2] == 2.0);
  CHECK((reverse_counts(rev) - counts).cwiseAbs().maxCoeff() == 0.0);

  VectorXd p(2);
  p << 0.2, 0.3;  // p3 = 0.5
  const VectorXd pr = reverse_prob_vector(p);
  CHECK_THAT(pr[0], WithinAbs(0.5, 1e-15));
  CHECK_THAT(pr[1], WithinAbs(0.3, 1e-15));
  const VectorXd back = reverse_prob_vector(pr);
  CHECK((back - p).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("round trip through every family and link", "[links][property]") {
  Rng rng(2024);
  for (Eigen::Index k : {1, 2, 3, 5}) {
    for (Family family : kFamilies) {
      for (Link link : kLinks) {
        for (int rep = 0; rep < 40; ++rep) {
          const VectorXd p = random_interior(k, rng);
          VectorXd eta(k);
          const VectorXd delta = family_fun(family, p);
          for (Eigen::Index j = 0; j < k; ++j) eta[j] = link_fun(link, delta[j]);
          const VectorXd back = inv_link(link, family, eta);
          REQUIRE((back - p).cwiseAbs().maxCoeff() < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("composite Jacobian matches finite differences everywhere",
          "[links][property]") {
  Rng rng(77);
  for (Eigen::Index k : {1, 2, 4}) {
    for (Family family : kFamilies) {
      for (Link link : kLinks) {
        for (int rep = 0; rep < 10; ++rep) {
          VectorXd eta(k);
          for (Eigen::Index j = 0; j < k; ++j) eta[j] = 2.0 * rng.normal();
          if (family == Family::cumulative) {
            std::sort(eta.data(), eta.data() + k);
            for (Eigen::Index j = 1; j < k; ++j) eta[j] += 0.05 * j;
          }
          const MatrixXd jac = inv_link_jacobian(link, family, eta);
          const MatrixXd fd = fd_composite_jacobian(link, family, eta);
          const double scale = std::max(1.0, jac.cwiseAbs().maxCoeff());
          REQUIRE((jac - fd).cwiseAbs().maxCoeff() / scale < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("monotonicity property orients every family", "[links][property]") {
  // Families with Property 1 (cumulative, sratio): componentwise larger
  // conditionals imply componentwise larger cumulative probabilities.
  // Property 2 families (cratio, acat) imply the reversed ordering.
  Rng rng(5150);
  const Eigen::Index k = 3;
  int checked = 0;
  while (checked < 1000) {
    VectorXd a(k), b(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double u = 0.02 + 0.96 * rng.uniform();
      const double v = 0.02 + 0.96 * rng.uniform();
      a[j] = std::min(u, v);
      b[j] = std::max(u, v);
    }
    for (Family family : kFamilies) {
      VectorXd lo = a, hi = b;
      if (family == Family::cumulative) {
        std::sort(lo.data(), lo.data() + k);
        std::sort(hi.data(), hi.data() + k);
        bool strict = true;
        for (Eigen::Index j = 1; j < k; ++j) {
          strict = strict && lo[j] > lo[j - 1] && hi[j] > hi[j - 1];
        }
        if (!strict) continue;
        for (Eigen::Index j = 0; j < k; ++j) hi[j] = std::max(hi[j], lo[j]);
      }
      const VectorXd gamma_lo = cumulative_sums(family_inv(family, lo));
      const VectorXd gamma_hi = cumulative_sums(family_inv(family, hi));
      const bool property1 = family == Family::cumulative || family == Family::sratio;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (property1) {
          REQUIRE(gamma_lo[j] <= gamma_hi[j] + 1e-12);
        } else {
          REQUIRE(gamma_lo[j] >= gamma_hi[j] - 1e-12);
        }
      }
    }
    ++checked;
  }
}
