#pragma once

// PLS path-model estimation. Outer weights and inner proxies are updated in
// simultaneous sweeps until the weights stop moving; loadings, scores and
// inner path coefficients are then read off the converged composites.

#include "dataset.hpp"
#include "error.hpp"
#include "model_spec.hpp"
#include "stats.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace latentpath {

/// Standardized manifest matrix for `m`: columns in manifest_columns() order,
/// inverted variables negated before standardization.
inline Eigen::MatrixXd manifest_matrix(const Dataset& d, const ModelSpec& m) {
  const auto names = m.manifest_columns();
  const auto inv = m.manifest_inverted();
  Eigen::MatrixXd x = standardize(d, names).z;
  for (std::size_t k = 0; k < inv.size(); ++k)
    if (inv[k]) x.col(static_cast<Eigen::Index>(k)) *= -1.0;
  return x;
}

/// Inner weight matrix: entry (i, j) is the weight of score i in the inner
/// proxy of block j. Non-adjacent entries are zero.
struct InnerWeights {
  Eigen::MatrixXd e;
  bool zero_correlation = false;  ///< centroid met a zero correlation, treated as +1
};

/// Standardized OLS of each endogenous score on its predecessors.
struct InnerModel {
  Eigen::MatrixXd coefficients;  ///< (j, i): coefficient of predecessor i for block j
  Eigen::MatrixXd std_errors;    ///< classical OLS standard errors, same layout
  Eigen::VectorXd r_squared;     ///< NaN for exogenous blocks
};

struct FitResult {
  ModelSpec model;
  std::vector<std::string> manifest_names;
  std::vector<std::size_t> manifest_block;  ///< owning block of each manifest
  Eigen::VectorXd outer_weights;            ///< scaled so each score has unit variance
  Eigen::VectorXd loadings;
  Eigen::MatrixXd scores;                   ///< n x Q, standardized
  Eigen::MatrixXd path_coefficients;        ///< (j, i) layout, see InnerModel
  Eigen::MatrixXd path_std_errors;
  Eigen::VectorXd r_squared;
  int iterations = 0;
  bool converged = false;
  double last_change = std::numeric_limits<double>::infinity();
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t block_count() const { return model.blocks.size(); }

  [[nodiscard]] Eigen::Index offset(std::size_t j) const {
    return static_cast<Eigen::Index>(model.manifest_offset(j));
  }
  [[nodiscard]] Eigen::Index width(std::size_t j) const {
    return static_cast<Eigen::Index>(model.blocks[j].manifest.size());
  }
  [[nodiscard]] Eigen::VectorXd block_weights(std::size_t j) const {
    return outer_weights.segment(offset(j), width(j));
  }
  [[nodiscard]] Eigen::VectorXd block_loadings(std::size_t j) const {
    return loadings.segment(offset(j), width(j));
  }
};

namespace detail {

/// Solves (Y_p' Y_p) b = Y_p' y. Throws NumericError when the predecessor
/// covariance is singular.
inline Eigen::VectorXd regress_scores(const Eigen::MatrixXd& preds, const Eigen::VectorXd& y,
                                      const std::string& what) {
  const Eigen::MatrixXd xtx = preds.transpose() * preds;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  lu.setThreshold(1e-10);
  if (lu.rank() < xtx.cols()) throw NumericError("singular predecessor covariance in " + what);
  return lu.solve(preds.transpose() * y);
}

inline Eigen::MatrixXd gather(const Eigen::MatrixXd& y, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(y.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = y.col(static_cast<Eigen::Index>(cols[k]));
  return out;
}

/// Rescales w so that X w has unit population variance.
inline void unit_variance(const Eigen::MatrixXd& xj, Eigen::VectorXd& w) {
  const Eigen::VectorXd y = xj * w;
  const double s = stats::sd(y);
  if (!(s > 0.0)) throw NumericError("block composite has zero variance");
  w /= s;
}

}  // namespace detail

inline InnerWeights inner_weights(const Eigen::MatrixXd& scores, const ModelSpec& m,
                                  InnerScheme scheme) {
  const auto q = static_cast<Eigen::Index>(m.blocks.size());
  const double n = static_cast<double>(scores.rows());
  InnerWeights out{Eigen::MatrixXd::Zero(q, q), false};
  auto corr = [&](Eigen::Index a, Eigen::Index b) {
    return scores.col(a).dot(scores.col(b)) / n;
  };
  for (const auto& p : m.paths) {
    const auto i = static_cast<Eigen::Index>(m.block_index(p.from));
    const auto j = static_cast<Eigen::Index>(m.block_index(p.to));
    const double r = corr(i, j);
    switch (scheme) {
      case InnerScheme::Centroid: {
        double s = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
        if (s == 0.0) {
          s = 1.0;
          out.zero_correlation = true;
        }
        out.e(i, j) = out.e(j, i) = s;
        break;
      }
      case InnerScheme::Factorial:
        out.e(i, j) = out.e(j, i) = r;
        break;
      case InnerScheme::Path:
        // successor i of j contributes its correlation; predecessors are
        // filled by regression below
        out.e(j, i) = r;
        break;
    }
  }
  if (scheme == InnerScheme::Path) {
    for (std::size_t j = 0; j < m.blocks.size(); ++j) {
      const auto preds = m.predecessors(j);
      if (preds.empty()) continue;
      const Eigen::VectorXd b = detail::regress_scores(
          detail::gather(scores, preds), scores.col(static_cast<Eigen::Index>(j)),
          "path-scheme inner weights for '" + m.blocks[j].name + "'");
      for (std::size_t k = 0; k < preds.size(); ++k)
        out.e(static_cast<Eigen::Index>(preds[k]), static_cast<Eigen::Index>(j)) =
            b[static_cast<Eigen::Index>(k)];
    }
  }
  return out;
}

inline InnerModel path_coefficients(const Eigen::MatrixXd& scores, const ModelSpec& m) {
  const auto q = static_cast<Eigen::Index>(m.blocks.size());
  const auto n = scores.rows();
  InnerModel out{Eigen::MatrixXd::Zero(q, q), Eigen::MatrixXd::Zero(q, q),
                 Eigen::VectorXd::Constant(q, std::numeric_limits<double>::quiet_NaN())};
  for (std::size_t j = 0; j < m.blocks.size(); ++j) {
    const auto preds = m.predecessors(j);
    if (preds.empty()) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    const Eigen::MatrixXd xp = detail::gather(scores, preds);
    const Eigen::VectorXd y = scores.col(jj);
    const std::string what = "inner regression for '" + m.blocks[j].name + "'";
    const Eigen::VectorXd b = detail::regress_scores(xp, y, what);
    const Eigen::VectorXd resid = y - xp * b;
    const double tss = (y.array() - y.mean()).square().sum();
    const double rss = resid.squaredNorm();
    out.r_squared[jj] = tss > 0.0 ? 1.0 - rss / tss : std::numeric_limits<double>::quiet_NaN();
    const auto k = static_cast<double>(preds.size());
    const double df = static_cast<double>(n) - k - 1.0;
    const double sigma2 = df > 0.0 ? rss / df : std::numeric_limits<double>::quiet_NaN();
    const Eigen::MatrixXd cov = sigma2 * (xp.transpose() * xp).inverse();
    for (std::size_t t = 0; t < preds.size(); ++t) {
      const auto i = static_cast<Eigen::Index>(preds[t]);
      const auto tt = static_cast<Eigen::Index>(t);
      out.coefficients(jj, i) = b[tt];
      out.std_errors(jj, i) = std::sqrt(std::max(0.0, cov(tt, tt)));
    }
  }
  return out;
}

/// Latent scores X_j w_j for every block.
inline Eigen::MatrixXd block_scores(const Eigen::MatrixXd& x, const ModelSpec& m,
                                    const Eigen::VectorXd& weights) {
  Eigen::MatrixXd y(x.rows(), static_cast<Eigen::Index>(m.blocks.size()));
  for (std::size_t j = 0; j < m.blocks.size(); ++j) {
    const auto off = static_cast<Eigen::Index>(m.manifest_offset(j));
    const auto p = static_cast<Eigen::Index>(m.blocks[j].manifest.size());
    y.col(static_cast<Eigen::Index>(j)) = x.middleCols(off, p) * weights.segment(off, p);
  }
  return y;
}

/// One outer/inner sweep from `weights`, returning the updated weights
/// (unit-variance scaled). `x` must already be standardized.
inline Eigen::VectorXd outer_inner_sweep(const Eigen::MatrixXd& x, const ModelSpec& m,
                                         const Eigen::VectorXd& weights,
                                         bool* zero_correlation = nullptr) {
  const double n = static_cast<double>(x.rows());
  const Eigen::MatrixXd y = block_scores(x, m, weights);
  const auto inner = inner_weights(y, m, m.scheme);
  if (zero_correlation) *zero_correlation = *zero_correlation || inner.zero_correlation;
  Eigen::VectorXd next(weights.size());
  for (std::size_t j = 0; j < m.blocks.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const auto off = static_cast<Eigen::Index>(m.manifest_offset(j));
    const auto p = static_cast<Eigen::Index>(m.blocks[j].manifest.size());
    const auto xj = x.middleCols(off, p);
    if (p == 1) {
      next[off] = 1.0;
      continue;
    }
    Eigen::VectorXd z = y * inner.e.col(jj);
    double s = stats::sd(z);
    if (!(s > 1e-12)) {
      // isolated block: the proxy is the block's own score
      z = y.col(jj);
      s = stats::sd(z);
    }
    z = (z.array() - z.mean()) / s;
    Eigen::VectorXd w;
    if (m.blocks[j].mode == Mode::A) {
      w = xj.transpose() * z / n;
    } else {
      w = detail::regress_scores(xj, z, "Mode B outer weights for '" + m.blocks[j].name + "'");
    }
    const Eigen::MatrixXd xjm = xj;
    detail::unit_variance(xjm, w);
    next.segment(off, p) = w;
  }
  return next;
}

/// Estimates the model on a standardized manifest matrix whose columns follow
/// m.manifest_columns(). Non-convergence is reported through `converged`;
/// singular inner regressions throw NumericError.
inline FitResult fit(const Eigen::MatrixXd& data, const ModelSpec& m) {
  validate(m);
  const auto total = static_cast<Eigen::Index>(m.manifest_columns().size());
  if (data.cols() != total) {
    throw InputError("data has " + std::to_string(data.cols()) + " columns, model needs " +
                     std::to_string(total));
  }
  const auto n = data.rows();
  if (n < 3) throw InputError("at least 3 observations required");
  std::size_t max_preds = 0;
  for (std::size_t j = 0; j < m.blocks.size(); ++j)
    max_preds = std::max(max_preds, m.predecessors(j).size());
  if (static_cast<std::size_t>(n) <= max_preds + 1)
    throw InputError("too few observations for the largest inner regression");
  if (!data.allFinite()) throw InputError("manifest matrix has non-finite values");

  Eigen::MatrixXd x = data;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    x.col(k).array() -= x.col(k).mean();
    const double s = std::sqrt(x.col(k).squaredNorm() / static_cast<double>(n));
    if (!(s > 0.0)) {
      throw NumericError("manifest '" + m.manifest_columns()[static_cast<std::size_t>(k)] +
                         "' has zero variance");
    }
    x.col(k) /= s;
  }

  FitResult r;
  r.model = m;
  r.manifest_names = m.manifest_columns();
  for (std::size_t j = 0; j < m.blocks.size(); ++j)
    for (std::size_t k = 0; k < m.blocks[j].manifest.size(); ++k) r.manifest_block.push_back(j);

  Eigen::VectorXd w = Eigen::VectorXd::Ones(total);
  for (std::size_t j = 0; j < m.blocks.size(); ++j) {
    const auto off = r.offset(j);
    const auto p = r.width(j);
    if (p == 1) continue;
    Eigen::VectorXd wj = w.segment(off, p);
    detail::unit_variance(x.middleCols(off, p), wj);
    w.segment(off, p) = wj;
  }

  bool zero_corr = false;
  for (int it = 1; it <= m.max_iter; ++it) {
    Eigen::VectorXd next = outer_inner_sweep(x, m, w, &zero_corr);
    r.last_change = (next - w).cwiseAbs().maxCoeff();
    w = std::move(next);
    r.iterations = it;
    if (r.last_change < m.tol) {
      r.converged = true;
      break;
    }
  }
  if (zero_corr)
    r.warnings.push_back("centroid scheme met a zero inner correlation; sign taken as +1");
  if (!r.converged) {
    r.warnings.push_back("no convergence after " + std::to_string(m.max_iter) +
                         " sweeps (last change " + std::to_string(r.last_change) + ")");
  }

  r.scores = block_scores(x, m, w);
  r.loadings.resize(total);
  for (std::size_t j = 0; j < m.blocks.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const auto off = r.offset(j);
    const auto p = r.width(j);
    if (p == 1) {
      w[off] = 1.0;
      r.scores.col(jj) = x.col(off);
      r.loadings[off] = 1.0;
      continue;
    }
    Eigen::VectorXd lj = x.middleCols(off, p).transpose() * r.scores.col(jj) / static_cast<double>(n);
    if (lj.sum() < 0.0) {
      lj = -lj;
      w.segment(off, p) *= -1.0;
      r.scores.col(jj) *= -1.0;
    }
    r.loadings.segment(off, p) = lj;
  }
  r.outer_weights = w;

  const auto inner = path_coefficients(r.scores, m);
  r.path_coefficients = inner.coefficients;
  r.path_std_errors = inner.std_errors;
  r.r_squared = inner.r_squared;
  return r;
}

inline FitResult fit(const Dataset& d, const ModelSpec& m) { return fit(manifest_matrix(d, m), m); }

}  // namespace latentpath
