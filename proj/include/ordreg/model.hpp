#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "ordreg/errors.hpp"
#include "ordreg/links.hpp"

namespace ordreg {

// Covariates plus multinomial response counts. Rows are observations; count
// entries may be non-integer (row sums act as observation weights).
struct Dataset {
  MatrixXd x;  // N x P, no intercept column
  MatrixXd y;  // N x (K+1), nonnegative, each row sum > 0
  std::vector<std::string> x_names;
  std::vector<std::string> y_names;

  Eigen::Index n_obs() const { return y.rows(); }
  Eigen::Index n_covariates() const { return x.cols(); }
  Eigen::Index n_linear_predictors() const { return y.cols() - 1; }
  double trials(Eigen::Index i) const { return y.row(i).sum(); }
  double total_trials() const { return y.sum(); }

  void validate() const {
    if (y.cols() < 2) throw DataError("response needs at least 2 categories");
    if (y.rows() < 1) throw DataError("empty dataset");
    if (x.rows() != y.rows()) {
      throw DataError("covariate and response row counts differ");
    }
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      double n_i = 0.0;
      for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const double v = y(i, j);
        if (!std::isfinite(v) || v < 0.0) {
          throw DataError("response count at row " + std::to_string(i + 1) +
                          " is negative or missing");
        }
        n_i += v;
      }
      if (!(n_i > 0.0)) {
        throw DataError("row " + std::to_string(i + 1) + " has zero trials");
      }
    }
    if (!x.array().isFinite().all()) {
      throw DataError("covariate matrix has missing or non-finite entries");
    }
  }
};

inline Dataset subset_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), data.x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()), data.y.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= data.n_obs()) {
      throw DataError("row index " + std::to_string(rows[i] + 1) + " out of range");
    }
    out.x.row(static_cast<Eigen::Index>(i)) = data.x.row(rows[i]);
    out.y.row(static_cast<Eigen::Index>(i)) = data.y.row(rows[i]);
  }
  out.x_names = data.x_names;
  out.y_names = data.y_names;
  return out;
}

// Returns the dataset with its K+1 response categories in reverse order.
// Backward families are fitted as forward families on the reversed data.
inline Dataset reverse_categories(const Dataset& data) {
  Dataset out = data;
  out.y = data.y.rowwise().reverse();
  out.y_names.assign(data.y_names.rbegin(), data.y_names.rend());
  return out;
}

struct ModelSpec {
  Family family = Family::cumulative;
  bool reverse = false;
  Link link = Link::logit;
  bool parallel_terms = true;
  bool nonparallel_terms = false;

  void validate() const {
    if (!parallel_terms && !nonparallel_terms) {
      throw ConfigError("parallelTerms and nonparallelTerms cannot both be FALSE");
    }
  }
};

// Coefficient block layout. The flattened vector is
//   (b0[0..K), b[0..P) if parallel, B.col(0), ..., B.col(K-1) if nonparallel)
// where B.col(k) holds the covariate coefficients of linear predictor k+1.
struct CoefLayout {
  Eigen::Index p = 0;
  Eigen::Index k = 0;
  bool parallel = true;
  bool nonparallel = false;

  Eigen::Index size() const {
    return k + (parallel ? p : 0) + (nonparallel ? p * k : 0);
  }
  Eigen::Index intercept(Eigen::Index j) const { return j; }
  Eigen::Index parallel_coef(Eigen::Index j) const { return k + j; }
  Eigen::Index nonparallel_coef(Eigen::Index j, Eigen::Index col) const {
    return k + (parallel ? p : 0) + col * p + j;
  }
  // The covariate a flattened index belongs to, or -1 for intercepts.
  Eigen::Index covariate_of(Eigen::Index q) const {
    if (q < k) return -1;
    q -= k;
    if (parallel) {
      if (q < p) return q;
      q -= p;
    }
    return q % p;
  }
  bool is_intercept(Eigen::Index q) const { return q < k; }
};

inline CoefLayout layout_for(const ModelSpec& spec, Eigen::Index p, Eigen::Index k) {
  return CoefLayout{p, k, spec.parallel_terms, spec.nonparallel_terms};
}

struct Coefficients {
  VectorXd b0;  // K intercepts
  VectorXd b;   // P parallel coefficients (size 0 when absent)
  MatrixXd B;   // P x K nonparallel coefficients (0 x 0 when absent)

  static Coefficients zero(const CoefLayout& lay) {
    Coefficients c;
    c.b0 = VectorXd::Zero(lay.k);
    c.b = lay.parallel ? VectorXd::Zero(lay.p) : VectorXd();
    c.B = lay.nonparallel ? MatrixXd::Zero(lay.p, lay.k) : MatrixXd();
    return c;
  }

  VectorXd flatten(const CoefLayout& lay) const {
    VectorXd beta(lay.size());
    beta.head(lay.k) = b0;
    Eigen::Index off = lay.k;
    if (lay.parallel) {
      beta.segment(off, lay.p) = b;
      off += lay.p;
    }
    if (lay.nonparallel) {
      for (Eigen::Index col = 0; col < lay.k; ++col) {
        beta.segment(off, lay.p) = B.col(col);
        off += lay.p;
      }
    }
    return beta;
  }

  static Coefficients unflatten(const CoefLayout& lay, const VectorXd& beta) {
    if (beta.size() != lay.size()) throw ConfigError("coefficient length mismatch");
    Coefficients c;
    c.b0 = beta.head(lay.k);
    Eigen::Index off = lay.k;
    if (lay.parallel) {
      c.b = beta.segment(off, lay.p);
      off += lay.p;
    }
    if (lay.nonparallel) {
      c.B.resize(lay.p, lay.k);
      for (Eigen::Index col = 0; col < lay.k; ++col) {
        c.B.col(col) = beta.segment(off, lay.p);
        off += lay.p;
      }
    }
    return c;
  }

  Eigen::Index count_nonzero() const {
    Eigen::Index n = 0;
    n += (b0.array() != 0.0).count();
    if (b.size() > 0) n += (b.array() != 0.0).count();
    if (B.size() > 0) n += (B.array() != 0.0).count();
    return n;
  }
};

// eta_i = b0 + (b' x_i) * 1 + B' x_i, assembled from the blocks without
// materializing the per-observation design matrix.
inline VectorXd linear_predictors(const Coefficients& coef,
                                  Eigen::Ref<const VectorXd> x_row) {
  VectorXd eta = coef.b0;
  if (coef.b.size() > 0) {
    if (coef.b.size() != x_row.size()) throw ConfigError("dimension mismatch in b");
    eta.array() += coef.b.dot(x_row);
  }
  if (coef.B.size() > 0) {
    if (coef.B.rows() != x_row.size()) throw ConfigError("dimension mismatch in B");
    eta += coef.B.transpose() * x_row;
  }
  return eta;
}

// N x K matrix of fitted class probabilities (classes 1..K; class K+1 is the
// complement). Attaches the offending row to cumulative infeasibility errors.
inline MatrixXd fitted_probabilities(const ModelSpec& spec, const Coefficients& coef,
                                     const Dataset& data) {
  const Eigen::Index n = data.n_obs();
  const Eigen::Index k = data.n_linear_predictors();
  MatrixXd probs(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const VectorXd eta = linear_predictors(coef, data.x.row(i).transpose());
    try {
      probs.row(i) = inv_link(spec.link, spec.family, eta).transpose();
    } catch (const InfeasibleError&) {
      throw InfeasibleError("fitted cumulative probabilities are not monotone "
                            "increasing at observation " + std::to_string(i + 1),
                            static_cast<long>(i));
    }
  }
  return probs;
}

// Multinomial log-likelihood with the combinatorial term dropped.
inline double log_likelihood(const ModelSpec& spec, const Coefficients& coef,
                             const Dataset& data) {
  const MatrixXd probs = fitted_probabilities(spec, coef, data);
  const Eigen::Index k = data.n_linear_predictors();
  double ll = 0.0;
  for (Eigen::Index i = 0; i < data.n_obs(); ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (data.y(i, j) > 0.0) ll += data.y(i, j) * std::log(probs(i, j));
    }
    const double p_last = 1.0 - probs.row(i).sum();
    if (data.y(i, k) > 0.0) ll += data.y(i, k) * std::log(p_last);
  }
  return ll;
}

namespace detail {

// Gradient of the per-observation log-likelihood in p:
// y_j/p_j - y_{K+1}/p_{K+1}.
inline VectorXd loglik_gradient_p(Eigen::Ref<const Eigen::RowVectorXd> y_row,
                                  Eigen::Ref<const Eigen::RowVectorXd> p_row) {
  const Eigen::Index k = p_row.size();
  const double p_last = 1.0 - p_row.sum();
  const double tail = y_row[k] / p_last;
  VectorXd g(k);
  for (Eigen::Index j = 0; j < k; ++j) g[j] = y_row[j] / p_row[j] - tail;
  return g;
}

// Inverse multinomial covariance n_i (diag(p)^{-1} + 11'/p_{K+1}) with every
// probability floored at p_min; used only inside the information matrix.
inline MatrixXd sigma_inverse(double n_i, Eigen::Ref<const Eigen::RowVectorXd> p_row,
                              double p_min) {
  const Eigen::Index k = p_row.size();
  const double p_last = std::max(1.0 - p_row.sum(), p_min);
  MatrixXd s = MatrixXd::Constant(k, k, n_i / p_last);
  for (Eigen::Index j = 0; j < k; ++j) s(j, j) += n_i / std::max(p_row[j], p_min);
  return s;
}

}  // namespace detail

// Score vector, Fisher information, and log-likelihood evaluated in one pass.
// The information uses probabilities floored at p_min; the score and
// log-likelihood use them uncapped.
struct LikelihoodParts {
  double loglik = 0.0;
  VectorXd score;
  MatrixXd info;
};

inline LikelihoodParts likelihood_parts(const ModelSpec& spec, const Coefficients& coef,
                                        const Dataset& data, double p_min,
                                        bool want_info = true) {
  const Eigen::Index n = data.n_obs();
  const Eigen::Index p = data.n_covariates();
  const Eigen::Index k = data.n_linear_predictors();
  const CoefLayout lay = layout_for(spec, p, k);
  const Eigen::Index q = lay.size();

  LikelihoodParts out;
  out.score = VectorXd::Zero(q);
  if (want_info) out.info = MatrixXd::Zero(q, q);

  const Eigen::Index par_off = lay.k;
  const Eigen::Index npar_off = lay.k + (lay.parallel ? p : 0);

  for (Eigen::Index i = 0; i < n; ++i) {
    const VectorXd x_i = data.x.row(i).transpose();
    const VectorXd eta = linear_predictors(coef, x_i);
    VectorXd prob;
    try {
      prob = inv_link(spec.link, spec.family, eta);
    } catch (const InfeasibleError&) {
      throw InfeasibleError("fitted cumulative probabilities are not monotone "
                            "increasing at observation " + std::to_string(i + 1),
                            static_cast<long>(i));
    }
    const Eigen::RowVectorXd p_row = prob.transpose();
    const Eigen::RowVectorXd y_row = data.y.row(i);

    const double p_last = 1.0 - prob.sum();
    for (Eigen::Index j = 0; j < k; ++j) {
      if (y_row[j] > 0.0) out.loglik += y_row[j] * std::log(prob[j]);
    }
    if (y_row[k] > 0.0) out.loglik += y_row[k] * std::log(p_last);

    const MatrixXd dh = inv_link_jacobian(spec.link, spec.family, eta);
    const VectorXd v = dh.transpose() * detail::loglik_gradient_p(y_row, p_row);

    out.score.head(k) += v;
    if (lay.parallel) out.score.segment(par_off, p) += v.sum() * x_i;
    if (lay.nonparallel) {
      for (Eigen::Index col = 0; col < k; ++col) {
        out.score.segment(npar_off + col * p, p) += v[col] * x_i;
      }
    }

    if (!want_info) continue;

    const MatrixXd sigma_inv = detail::sigma_inverse(data.trials(i), p_row, p_min);
    const MatrixXd w = dh.transpose() * sigma_inv * dh;  // K x K
    const MatrixXd xx = x_i * x_i.transpose();           // P x P

    out.info.block(0, 0, k, k) += w;
    if (lay.parallel) {
      const VectorXd w_rowsum = w.rowwise().sum();
      const MatrixXd cross = w_rowsum * x_i.transpose();  // K x P
      out.info.block(0, par_off, k, p) += cross;
      out.info.block(par_off, 0, p, k) += cross.transpose();
      out.info.block(par_off, par_off, p, p) += w.sum() * xx;
    }
    if (lay.nonparallel) {
      for (Eigen::Index col = 0; col < k; ++col) {
        const Eigen::Index off = npar_off + col * p;
        const MatrixXd cross = w.col(col) * x_i.transpose();  // K x P
        out.info.block(0, off, k, p) += cross;
        out.info.block(off, 0, p, k) += cross.transpose();
        if (lay.parallel) {
          const double w_colsum = w.col(col).sum();
          out.info.block(par_off, off, p, p) += w_colsum * xx;
          out.info.block(off, par_off, p, p) += w_colsum * xx;
        }
        for (Eigen::Index col2 = 0; col2 < k; ++col2) {
          out.info.block(npar_off + col2 * p, off, p, p) += w(col2, col) * xx;
        }
      }
    }
  }
  return out;
}

inline VectorXd score(const ModelSpec& spec, const Coefficients& coef,
                      const Dataset& data) {
  return likelihood_parts(spec, coef, data, 0.0, false).score;
}

inline MatrixXd fisher_information(const ModelSpec& spec, const Coefficients& coef,
                                   const Dataset& data, double p_min) {
  return likelihood_parts(spec, coef, data, p_min, true).info;
}

// Column scaling to unit standard deviation. Moments are weighted by the
// trial counts so that grouped and ungrouped encodings of the same trials
// scale identically; constant columns keep scale 1 and are flagged.
struct Standardization {
  Dataset data;
  VectorXd scales;                // per-covariate divisor applied to x
  std::vector<bool> zero_variance;
};

inline Standardization standardize(const Dataset& data) {
  Standardization out;
  out.data = data;
  const Eigen::Index p = data.n_covariates();
  out.scales = VectorXd::Ones(p);
  out.zero_variance.assign(static_cast<size_t>(p), false);

  const double n_star = data.total_trials();
  VectorXd weights(data.n_obs());
  for (Eigen::Index i = 0; i < data.n_obs(); ++i) weights[i] = data.trials(i);

  for (Eigen::Index j = 0; j < p; ++j) {
    const double mean = weights.dot(data.x.col(j)) / n_star;
    const double var =
        (weights.array() * (data.x.col(j).array() - mean).square()).sum() / n_star;
    const double sd = std::sqrt(var);
    if (sd > 1e-12 * (1.0 + std::abs(mean))) {
      out.scales[j] = sd;
      out.data.x.col(j) /= sd;
    } else {
      out.zero_variance[static_cast<size_t>(j)] = true;
    }
  }
  return out;
}

// Maps coefficients fitted on scaled covariates back to the original scale.
inline Coefficients unstandardize(const Coefficients& coef, const VectorXd& scales) {
  Coefficients out = coef;
  if (out.b.size() > 0) out.b.array() /= scales.array();
  if (out.B.size() > 0) {
    for (Eigen::Index j = 0; j < out.B.rows(); ++j) out.B.row(j) /= scales[j];
  }
  return out;
}

}  // namespace ordreg
