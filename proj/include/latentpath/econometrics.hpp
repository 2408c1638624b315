#pragma once

// OLS with heteroskedasticity-robust (HC0/HC1) covariance, and Spearman
// correlation tables, for benchmarking an index against alternatives.

#include "dataset.hpp"
#include "error.hpp"
#include "stats.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <string>
#include <vector>

namespace latentpath {

enum class CovType { Classical, HC0, HC1 };

inline std::string to_string(CovType c) {
  switch (c) {
    case CovType::Classical: return "classical";
    case CovType::HC0: return "HC0";
    case CovType::HC1: return "HC1";
  }
  return "HC1";
}

struct Term {
  std::string column;
  bool log = false;

  [[nodiscard]] std::string label() const { return log ? "ln(" + column + ")" : column; }
};

struct RegressionSpec {
  Term dependent;
  std::vector<Term> regressors;
  std::vector<Term> controls;
  bool robust = true;
  CovType robust_type = CovType::HC1;
  std::vector<std::string> spearman;  ///< optional columns for a rank-correlation table

  [[nodiscard]] CovType covariance() const { return robust ? robust_type : CovType::Classical; }
};

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p = 1.0;
};

inline std::string stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  return "";
}

struct RegressionResult {
  std::string dependent;
  Coefficient intercept;
  std::vector<Coefficient> terms;  ///< regressors, then controls
  double r_squared = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;  ///< parameters including the intercept
  CovType covariance = CovType::HC1;
  std::size_t dropped = 0;  ///< rows with a missing value in a used column
};

namespace detail {

inline Eigen::VectorXd term_values(const Dataset& d, const Term& t) {
  Eigen::VectorXd v = d.values.col(d.column_index(t.column));
  if (!t.log) return v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) continue;
    if (v[i] <= 0.0) {
      throw InputError("log of nonpositive value " + std::to_string(v[i]) + " in column '" +
                       t.column + "' (entity " + to_string(d.entities[static_cast<std::size_t>(i)]) +
                       ")");
    }
    v[i] = std::log(v[i]);
  }
  return v;
}

}  // namespace detail

/// Least squares on an explicit design. `x` must already contain the
/// intercept column; `names` labels its columns.
inline RegressionResult ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const std::vector<std::string>& names, CovType cov) {
  const auto n = x.rows();
  const auto k = x.cols();
  if (n <= k) throw InputError("regression needs more rows than parameters");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    std::string cols;
    for (Eigen::Index c = qr.rank(); c < k; ++c) {
      if (!cols.empty()) cols += ", ";
      cols += names[static_cast<std::size_t>(qr.colsPermutation().indices()[c])];
    }
    throw NumericError("rank-deficient design; collinear column(s): " + cols);
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd e = y - x * beta;
  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  const double dn = static_cast<double>(n);
  const double dk = static_cast<double>(k);
  Eigen::MatrixXd v;
  if (cov == CovType::Classical) {
    v = (e.squaredNorm() / (dn - dk)) * xtx_inv;
  } else {
    const Eigen::MatrixXd meat = x.transpose() * e.array().square().matrix().asDiagonal() * x;
    v = xtx_inv * meat * xtx_inv;
    if (cov == CovType::HC1) v *= dn / (dn - dk);
  }

  RegressionResult r;
  r.n = static_cast<std::size_t>(n);
  r.k = static_cast<std::size_t>(k);
  r.covariance = cov;
  const double tss = (y.array() - y.mean()).square().sum();
  if (!(tss > 0.0)) throw NumericError("dependent variable is constant");
  r.r_squared = std::clamp(1.0 - e.squaredNorm() / tss, 0.0, 1.0);
  for (Eigen::Index c = 0; c < k; ++c) {
    Coefficient co;
    co.name = names[static_cast<std::size_t>(c)];
    co.estimate = beta[c];
    co.se = std::sqrt(std::max(0.0, v(c, c)));
    co.t = co.se > 0.0 ? co.estimate / co.se : (co.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), co.estimate));
    co.p = co.se > 0.0 ? stats::t_two_sided_p(co.t, dn - dk) : (co.estimate == 0.0 ? 1.0 : 0.0);
    if (c == 0) r.intercept = co;
    else r.terms.push_back(co);
  }
  return r;
}

/// OLS of the spec's dependent term on an intercept, regressors and controls,
/// over rows complete in every used column.
inline RegressionResult ols_robust(const Dataset& d, const RegressionSpec& spec) {
  std::vector<Term> rhs = spec.regressors;
  rhs.insert(rhs.end(), spec.controls.begin(), spec.controls.end());
  if (rhs.empty()) throw InputError("regression has no regressors");
  for (const auto& t : rhs)
    if (t.column == spec.dependent.column)
      throw InputError("dependent '" + t.column + "' also listed as a regressor");

  const Eigen::VectorXd yall = detail::term_values(d, spec.dependent);
  std::vector<Eigen::VectorXd> cols;
  for (const auto& t : rhs) cols.push_back(detail::term_values(d, t));

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    bool ok = std::isfinite(yall[i]);
    for (const auto& c : cols) ok = ok && std::isfinite(c[i]);
    if (ok) keep.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(rhs.size()) + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = keep[static_cast<std::size_t>(r)];
    y[r] = yall[i];
    x(r, 0) = 1.0;
    for (std::size_t c = 0; c < cols.size(); ++c) x(r, static_cast<Eigen::Index>(c) + 1) = cols[c][i];
  }
  std::vector<std::string> names{"(intercept)"};
  for (const auto& t : rhs) names.push_back(t.label());
  auto res = ols(x, y, names, spec.covariance());
  res.dependent = spec.dependent.label();
  res.dropped = static_cast<std::size_t>(d.rows() - n);
  return res;
}

inline Term term_from_json(const nlohmann::json& j) {
  if (j.is_string()) return {j.get<std::string>(), false};
  return {j.at("column").get<std::string>(), j.value("log", false)};
}

/// Regression spec file: {"dependent": {"column": "gdp", "log": true},
/// "regressors": [...], "controls": [...], "robust": true, "hc": "HC1",
/// "spearman": [...]}. Terms may also be bare column names.
inline RegressionSpec regression_from_json(const nlohmann::json& j) {
  RegressionSpec s;
  try {
    s.dependent = term_from_json(j.at("dependent"));
    for (const auto& t : j.value("regressors", nlohmann::json::array())) s.regressors.push_back(term_from_json(t));
    for (const auto& t : j.value("controls", nlohmann::json::array())) s.controls.push_back(term_from_json(t));
    s.robust = j.value("robust", true);
    const auto hc = j.value("hc", std::string("HC1"));
    if (hc == "HC1") s.robust_type = CovType::HC1;
    else if (hc == "HC0") s.robust_type = CovType::HC0;
    else throw InputError("unknown robust covariance '" + hc + "' (expected HC0 or HC1)");
    for (const auto& c : j.value("spearman", nlohmann::json::array())) s.spearman.push_back(c.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed regression spec: ") + e.what());
  }
  return s;
}

inline RegressionSpec parse_regression(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open regression spec '" + path + "'");
  try {
    return regression_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

struct CorrelationMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd rho;
  Eigen::MatrixXd p_value;
  std::vector<bool> constant;  ///< rho undefined (NaN) for these columns
  std::size_t n = 0;
};

/// Midrank Spearman correlations over rows complete in every listed column.
inline CorrelationMatrix spearman_matrix(const Dataset& d, const std::vector<std::string>& columns) {
  const auto cc = complete_cases(d, columns);
  if (cc.data.rows() < 5) throw InputError("spearman_matrix needs at least 5 rows");
  const Eigen::MatrixXd x = cc.data.select(columns);
  const auto k = x.cols();
  CorrelationMatrix out;
  out.labels = columns;
  out.n = static_cast<std::size_t>(x.rows());
  out.rho = Eigen::MatrixXd::Identity(k, k);
  out.p_value = Eigen::MatrixXd::Zero(k, k);
  std::vector<Eigen::VectorXd> ranks;
  for (Eigen::Index c = 0; c < k; ++c) {
    ranks.push_back(stats::midranks(x.col(c)));
    out.constant.push_back(x.col(c).maxCoeff() == x.col(c).minCoeff());
  }
  for (Eigen::Index a = 0; a < k; ++a) {
    if (out.constant[static_cast<std::size_t>(a)]) {
      out.rho(a, a) = std::numeric_limits<double>::quiet_NaN();
      out.p_value(a, a) = std::numeric_limits<double>::quiet_NaN();
    }
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const double r = stats::correlation(ranks[static_cast<std::size_t>(a)], ranks[static_cast<std::size_t>(b)]);
      out.rho(a, b) = out.rho(b, a) = r;
      out.p_value(a, b) = out.p_value(b, a) = stats::correlation_p(r, out.n);
    }
  }
  return out;
}

}  // namespace latentpath
