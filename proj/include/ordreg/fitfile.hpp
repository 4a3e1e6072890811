#pragma once

#include <charconv>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ordreg/fit.hpp"

namespace ordreg {

namespace detail {

// Doubles are stored as shortest round-trip decimal strings so fit files are
// portable and reload bit-exact.
inline std::string double_to_string(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double double_from_string(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("bad numeric literal '" + s + "' in fit file");
  }
  return v;
}

inline nlohmann::ordered_json vector_to_json(const VectorXd& v) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(double_to_string(v[i]));
  return arr;
}

inline VectorXd vector_from_json(const nlohmann::json& arr) {
  VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (size_t i = 0; i < arr.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = double_from_string(arr[i].get<std::string>());
  }
  return v;
}

inline const char* status_name(EntryStatus s) {
  switch (s) {
    case EntryStatus::fitted: return "fitted";
    case EntryStatus::reused_stop: return "reused_stop";
    case EntryStatus::reused_infeasible: return "reused_infeasible";
  }
  return "?";
}

inline EntryStatus status_from_name(const std::string& s) {
  if (s == "fitted") return EntryStatus::fitted;
  if (s == "reused_stop") return EntryStatus::reused_stop;
  if (s == "reused_infeasible") return EntryStatus::reused_infeasible;
  throw DataError("unknown path entry status '" + s + "' in fit file");
}

inline Link link_from_name(const std::string& s) {
  if (s == "logit") return Link::logit;
  if (s == "probit") return Link::probit;
  if (s == "cloglog") return Link::cloglog;
  if (s == "cauchit") return Link::cauchit;
  throw DataError("unknown link '" + s + "'");
}

inline Family family_from_name(const std::string& s) {
  if (s == "cumulative") return Family::cumulative;
  if (s == "sratio") return Family::sratio;
  if (s == "cratio") return Family::cratio;
  if (s == "acat") return Family::acat;
  throw DataError("unknown family '" + s + "'");
}

}  // namespace detail

inline constexpr int kFitFileVersion = 1;

inline nlohmann::ordered_json fit_to_json(const FitModel& fit) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["format"] = "ordreg-fit";
  doc["version"] = kFitFileVersion;
  doc["spec"] = {{"family", to_string(fit.spec.family)},
                 {"link", to_string(fit.spec.link)},
                 {"reverse", fit.spec.reverse},
                 {"parallelTerms", fit.spec.parallel_terms},
                 {"nonparallelTerms", fit.spec.nonparallel_terms}};
  doc["nObs"] = fit.n_obs;
  doc["nCovariates"] = fit.n_covariates;
  doc["nPredictors"] = fit.n_predictors;
  doc["nTrials"] = detail::double_to_string(fit.n_star);
  doc["xNames"] = fit.x_names;
  doc["yNames"] = fit.y_names;
  doc["scales"] = detail::vector_to_json(fit.scales);
  doc["zeroVariance"] = fit.zero_variance;
  doc["loglikNull"] = detail::double_to_string(fit.loglik_null);
  if (std::isfinite(fit.lambda_max_value)) {
    doc["lambdaMax"] = detail::double_to_string(fit.lambda_max_value);
  }
  doc["truncated"] = fit.truncated;
  doc["terminationReason"] = fit.termination_reason;

  ordered_json path = ordered_json::array();
  for (const PathEntry& entry : fit.path) {
    ordered_json e;
    e["lambda"] = detail::double_to_string(entry.lambda);
    e["loglik"] = detail::double_to_string(entry.loglik);
    e["nNonzero"] = entry.n_nonzero;
    e["converged"] = entry.converged;
    e["innerConverged"] = entry.inner_converged;
    e["outerIterations"] = entry.outer_iterations;
    e["status"] = detail::status_name(entry.status);
    e["b0"] = detail::vector_to_json(entry.coef.b0);
    if (entry.coef.b.size() > 0) e["b"] = detail::vector_to_json(entry.coef.b);
    if (entry.coef.B.size() > 0) {
      ordered_json rows = ordered_json::array();
      for (Eigen::Index r = 0; r < entry.coef.B.rows(); ++r) {
        rows.push_back(detail::vector_to_json(entry.coef.B.row(r).transpose()));
      }
      e["B"] = rows;
    }
    path.push_back(std::move(e));
  }
  doc["path"] = std::move(path);
  return doc;
}

inline FitModel fit_from_json(const nlohmann::json& doc) {
  if (!doc.contains("format") || doc["format"] != "ordreg-fit") {
    throw DataError("not an ordreg fit file");
  }
  if (doc["version"].get<int>() != kFitFileVersion) {
    throw DataError("unsupported fit file version");
  }
  FitModel fit;
  const auto& spec = doc["spec"];
  fit.spec.family = detail::family_from_name(spec["family"].get<std::string>());
  fit.spec.link = detail::link_from_name(spec["link"].get<std::string>());
  fit.spec.reverse = spec["reverse"].get<bool>();
  fit.spec.parallel_terms = spec["parallelTerms"].get<bool>();
  fit.spec.nonparallel_terms = spec["nonparallelTerms"].get<bool>();
  fit.n_obs = doc["nObs"].get<Eigen::Index>();
  fit.n_covariates = doc["nCovariates"].get<Eigen::Index>();
  fit.n_predictors = doc["nPredictors"].get<Eigen::Index>();
  fit.n_star = detail::double_from_string(doc["nTrials"].get<std::string>());
  fit.x_names = doc["xNames"].get<std::vector<std::string>>();
  fit.y_names = doc["yNames"].get<std::vector<std::string>>();
  fit.scales = detail::vector_from_json(doc["scales"]);
  fit.zero_variance = doc["zeroVariance"].get<std::vector<bool>>();
  fit.loglik_null = detail::double_from_string(doc["loglikNull"].get<std::string>());
  if (doc.contains("lambdaMax")) {
    fit.lambda_max_value = detail::double_from_string(doc["lambdaMax"].get<std::string>());
  }
  fit.truncated = doc["truncated"].get<bool>();
  fit.termination_reason = doc["terminationReason"].get<std::string>();

  for (const auto& e : doc["path"]) {
    PathEntry entry;
    entry.lambda = detail::double_from_string(e["lambda"].get<std::string>());
    entry.loglik = detail::double_from_string(e["loglik"].get<std::string>());
    entry.n_nonzero = e["nNonzero"].get<Eigen::Index>();
    entry.converged = e["converged"].get<bool>();
    entry.inner_converged = e["innerConverged"].get<bool>();
    entry.outer_iterations = e["outerIterations"].get<int>();
    entry.status = detail::status_from_name(e["status"].get<std::string>());
    entry.coef.b0 = detail::vector_from_json(e["b0"]);
    if (e.contains("b")) entry.coef.b = detail::vector_from_json(e["b"]);
    if (e.contains("B")) {
      const auto& rows = e["B"];
      entry.coef.B.resize(static_cast<Eigen::Index>(rows.size()), fit.n_predictors);
      for (size_t r = 0; r < rows.size(); ++r) {
        entry.coef.B.row(static_cast<Eigen::Index>(r)) =
            detail::vector_from_json(rows[r]).transpose();
      }
    }
    fit.path.push_back(std::move(entry));
  }
  return fit;
}

inline void save_fit(const FitModel& fit, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << fit_to_json(fit).dump(2) << "\n";
}

inline FitModel load_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& err) {
    throw DataError("cannot parse '" + path + "': " + err.what());
  }
  return fit_from_json(doc);
}

}  // namespace ordreg
