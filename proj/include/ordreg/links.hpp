#pragma once

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "ordreg/errors.hpp"

namespace ordreg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Scalar link applied elementwise to each conditional/cumulative probability.
enum class Link { logit, probit, cloglog, cauchit };

// Transform between the class-probability vector p (length K, class K+1
// implicit) and the vector of conditional/cumulative probabilities it is
// modeled through. Only forward forms are implemented; backward forms are
// fitted by reversing the category order of the data.
enum class Family { cumulative, sratio, cratio, acat };

inline const char* to_string(Link link) {
  switch (link) {
    case Link::logit: return "logit";
    case Link::probit: return "probit";
    case Link::cloglog: return "cloglog";
    case Link::cauchit: return "cauchit";
  }
  return "?";
}

inline const char* to_string(Family family) {
  switch (family) {
    case Family::cumulative: return "cumulative";
    case Family::sratio: return "sratio";
    case Family::cratio: return "cratio";
    case Family::acat: return "acat";
  }
  return "?";
}

// Conditional probabilities are floored away from {0, 1} before the family
// recursions, which divide by terms like (1 - sum of p).
inline constexpr double kUnitEps = 1e-15;

inline double clamp_unit(double d) {
  return std::min(1.0 - kUnitEps, std::max(kUnitEps, d));
}

// g*: (0,1) -> R
inline double link_fun(Link link, double d) {
  switch (link) {
    case Link::logit:
      return std::log(d) - std::log1p(-d);
    case Link::probit:
      return boost::math::quantile(boost::math::normal_distribution<double>(), d);
    case Link::cloglog:
      return std::log(-std::log1p(-d));
    case Link::cauchit:
      return std::tan(std::numbers::pi * (d - 0.5));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// h*: R -> (0,1), inverse of link_fun
inline double link_inv(Link link, double eta) {
  switch (link) {
    case Link::logit: {
      if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
      const double e = std::exp(eta);
      return e / (1.0 + e);
    }
    case Link::probit:
      return 0.5 * std::erfc(-eta * std::numbers::sqrt2 / 2.0);
    case Link::cloglog:
      return -std::expm1(-std::exp(eta));
    case Link::cauchit:
      return 0.5 + std::atan(eta) / std::numbers::pi;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// h*'(eta), strictly positive for all finite eta
inline double link_inv_deriv(Link link, double eta) {
  switch (link) {
    case Link::logit: {
      const double e = std::exp(-std::abs(eta));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case Link::probit:
      return std::exp(-0.5 * eta * eta) / std::sqrt(2.0 * std::numbers::pi);
    case Link::cloglog:
      return std::exp(eta - std::exp(eta));
    case Link::cauchit:
      return 1.0 / (std::numbers::pi * (1.0 + eta * eta));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace detail {

inline void require_interior(const VectorXd& p) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (!(p[j] > 0.0)) {
      throw DataError("probability vector entry " + std::to_string(j + 1) +
                      " is not strictly positive");
    }
    sum += p[j];
  }
  if (!(sum < 1.0)) {
    throw DataError("probability vector sums to >= 1; class K+1 has no mass");
  }
}

inline void require_open_unit(const VectorXd& delta) {
  for (Eigen::Index j = 0; j < delta.size(); ++j) {
    if (!(delta[j] > 0.0 && delta[j] < 1.0)) {
      throw DataError("conditional probability " + std::to_string(j + 1) +
                      " outside (0,1)");
    }
  }
}

inline bool strictly_increasing(const VectorXd& v) {
  for (Eigen::Index j = 1; j < v.size(); ++j) {
    if (!(v[j] > v[j - 1])) return false;
  }
  return true;
}

// Forward stopping ratio pieces, shared with the continuation ratio family.
inline VectorXd sratio_fun(const VectorXd& p) {
  const Eigen::Index k = p.size();
  VectorXd delta(k);
  double remaining = 1.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    delta[j] = p[j] / remaining;
    remaining -= p[j];
  }
  return delta;
}

inline VectorXd sratio_inv(const VectorXd& delta) {
  const Eigen::Index k = delta.size();
  VectorXd p(k);
  double remaining = 1.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    p[j] = delta[j] * remaining;
    remaining -= p[j];
  }
  return p;
}

// p_m = delta_m * prod_{i<m}(1-delta_i), so
// dp_m/ddelta_n = p_m/delta_m for n=m, -p_m/(1-delta_n) for n<m, 0 above the
// diagonal. This closed form avoids the cancellation the row recursion
// suffers when some delta is near 0 or 1.
inline MatrixXd sratio_inv_jacobian(const VectorXd& delta) {
  const Eigen::Index k = delta.size();
  const VectorXd p = sratio_inv(delta);
  MatrixXd jac = MatrixXd::Zero(k, k);
  for (Eigen::Index m = 0; m < k; ++m) {
    for (Eigen::Index n = 0; n < m; ++n) jac(m, n) = -p[m] / (1.0 - delta[n]);
    jac(m, m) = p[m] / delta[m];
  }
  return jac;
}

}  // namespace detail

// g_MO: class probabilities -> conditional/cumulative probabilities delta.
inline VectorXd family_fun(Family family, const VectorXd& p) {
  detail::require_interior(p);
  const Eigen::Index k = p.size();
  switch (family) {
    case Family::cumulative: {
      VectorXd delta(k);
      double cum = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        cum += p[j];
        delta[j] = cum;
      }
      return delta;
    }
    case Family::sratio:
      return detail::sratio_fun(p);
    case Family::cratio:
      return VectorXd::Ones(k) - detail::sratio_fun(p);
    case Family::acat: {
      VectorXd delta(k);
      const double p_last = 1.0 - p.sum();
      for (Eigen::Index j = 0; j < k; ++j) {
        const double next = (j + 1 < k) ? p[j + 1] : p_last;
        delta[j] = next / (p[j] + next);
      }
      return delta;
    }
  }
  throw ConfigError("unknown family");
}

// h_MO: delta -> class probabilities. For the cumulative family a
// non-increasing delta has no probability-vector preimage and raises
// InfeasibleError.
inline VectorXd family_inv(Family family, const VectorXd& delta) {
  detail::require_open_unit(delta);
  const Eigen::Index k = delta.size();
  switch (family) {
    case Family::cumulative: {
      if (!detail::strictly_increasing(delta)) {
        throw InfeasibleError("cumulative probabilities are not monotone increasing");
      }
      VectorXd p(k);
      double prev = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        p[j] = delta[j] - prev;
        prev = delta[j];
      }
      return p;
    }
    case Family::sratio:
      return detail::sratio_inv(delta);
    case Family::cratio:
      return detail::sratio_inv(VectorXd::Ones(k) - delta);
    case Family::acat: {
      // p_{m+1}/p_m = delta_m/(1-delta_m); work in log space so long runs of
      // large or small ratios cannot overflow the cumulative products.
      VectorXd log_t(k);
      double acc = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        acc += std::log(delta[j]) - std::log1p(-delta[j]);
        log_t[j] = acc;
      }
      const double m = std::max(0.0, log_t.maxCoeff());
      double denom = std::exp(-m);
      for (Eigen::Index j = 0; j < k; ++j) denom += std::exp(log_t[j] - m);
      VectorXd p(k);
      p[0] = std::exp(-m) / denom;
      for (Eigen::Index j = 1; j < k; ++j) p[j] = std::exp(log_t[j - 1] - m) / denom;
      return p;
    }
  }
  throw ConfigError("unknown family");
}

// D h_MO(delta): entry (m, n) is the partial of class probability m with
// respect to delta_n.
inline MatrixXd family_inv_jacobian(Family family, const VectorXd& delta) {
  detail::require_open_unit(delta);
  const Eigen::Index k = delta.size();
  switch (family) {
    case Family::cumulative: {
      if (!detail::strictly_increasing(delta)) {
        throw InfeasibleError("cumulative probabilities are not monotone increasing");
      }
      MatrixXd jac = MatrixXd::Identity(k, k);
      for (Eigen::Index m = 1; m < k; ++m) jac(m, m - 1) = -1.0;
      return jac;
    }
    case Family::sratio:
      return detail::sratio_inv_jacobian(delta);
    case Family::cratio:
      return -detail::sratio_inv_jacobian(VectorXd::Ones(k) - delta);
    case Family::acat: {
      // With gamma_n the cumulative probability through class n and
      // g_n = 1/(delta_n (1-delta_n)):
      //   dp_m/ddelta_n = p_m g_n gamma_n         for m > n,
      //   dp_m/ddelta_n = -p_m g_n (1 - gamma_n)  for m <= n.
      // Cancellation-free, unlike the row recursion in ratio form.
      const VectorXd p = family_inv(Family::acat, delta);
      VectorXd gamma(k);
      double cum = 0.0;
      for (Eigen::Index n = 0; n < k; ++n) {
        cum += p[n];
        gamma[n] = cum;
      }
      MatrixXd jac(k, k);
      for (Eigen::Index n = 0; n < k; ++n) {
        const double g = 1.0 / (delta[n] * (1.0 - delta[n]));
        for (Eigen::Index m = 0; m < k; ++m) {
          jac(m, n) = (m > n) ? p[m] * g * gamma[n] : -p[m] * g * (1.0 - gamma[n]);
        }
      }
      return jac;
    }
  }
  throw ConfigError("unknown family");
}

// h = h_MO(h_EL(eta)). Throws InfeasibleError for a cumulative family whose
// elementwise-inverted eta is non-monotone.
inline VectorXd inv_link(Link link, Family family, const VectorXd& eta) {
  VectorXd delta(eta.size());
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    delta[j] = clamp_unit(link_inv(link, eta[j]));
  }
  return family_inv(family, delta);
}

// Unchecked variant for prediction on new data: infeasible cumulative rows
// yield mechanically differenced "probabilities" (possibly nonpositive) and
// feasible=false instead of an exception.
struct InvLinkResult {
  VectorXd p;
  bool feasible = true;
};

inline InvLinkResult inv_link_unchecked(Link link, Family family, const VectorXd& eta) {
  VectorXd delta(eta.size());
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    delta[j] = clamp_unit(link_inv(link, eta[j]));
  }
  InvLinkResult out;
  if (family == Family::cumulative && !detail::strictly_increasing(delta)) {
    out.feasible = false;
    out.p.resize(delta.size());
    double prev = 0.0;
    for (Eigen::Index j = 0; j < delta.size(); ++j) {
      out.p[j] = delta[j] - prev;
      prev = delta[j];
    }
    return out;
  }
  out.p = family_inv(family, delta);
  return out;
}

// D h(eta): column n of D h_MO(delta) scaled by h*'(eta_n). Where the unit
// clamp is active the computed inverse link is flat in eta_n, so that column
// is zero; this keeps the Jacobian consistent with h as actually evaluated.
inline MatrixXd inv_link_jacobian(Link link, Family family, const VectorXd& eta) {
  VectorXd delta(eta.size());
  VectorXd factor(eta.size());
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    const double raw = link_inv(link, eta[j]);
    delta[j] = clamp_unit(raw);
    factor[j] = (raw == delta[j]) ? link_inv_deriv(link, eta[j]) : 0.0;
  }
  MatrixXd jac = family_inv_jacobian(family, delta);
  for (Eigen::Index n = 0; n < eta.size(); ++n) {
    jac.col(n) *= factor[n];
  }
  return jac;
}

// Reverses the order of the K+1 categories of a count row.
inline VectorXd reverse_counts(const VectorXd& counts) {
  return counts.reverse();
}

// Reverses the categories of a length-K probability vector over K+1 classes:
// the result parametrizes the same distribution with classes relabeled
// K+1, K, ..., 1 (and now leaves out the original class 1).
inline VectorXd reverse_prob_vector(const VectorXd& p) {
  const Eigen::Index k = p.size();
  VectorXd out(k);
  out[0] = 1.0 - p.sum();
  for (Eigen::Index j = 1; j < k; ++j) out[j] = p[k - j];
  return out;
}

}  // namespace ordreg
