#pragma once

// Small statistical kernels shared across modules. All moments use the
// population divisor n.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace latentpath::stats {

inline double mean(const Eigen::Ref<const Eigen::VectorXd>& x) { return x.mean(); }

inline double sd(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double m = x.mean();
  return std::sqrt((x.array() - m).square().sum() / static_cast<double>(x.size()));
}

inline double correlation(const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (dx * dy).sum() / std::sqrt(sxx * syy);
}

/// Column-wise z-scores; columns with zero spread come back as zeros.
inline Eigen::MatrixXd zscore(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  Eigen::MatrixXd out = x;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double m = out.col(j).mean();
    out.col(j).array() -= m;
    const double s = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(out.rows()));
    if (s > 0.0) out.col(j) /= s;
  }
  return out;
}

/// Correlation matrix of the columns of x.
inline Eigen::MatrixXd correlation_matrix(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  const Eigen::MatrixXd z = zscore(x);
  Eigen::MatrixXd r = (z.transpose() * z) / static_cast<double>(x.rows());
  r.diagonal().setOnes();
  return r;
}

/// Average ranks (midranks for ties), 1-based.
inline Eigen::VectorXd midranks(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  Eigen::VectorXd ranks(x.size());
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[idx[j]] == x[idx[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

inline double spearman(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y) {
  return correlation(midranks(x), midranks(y));
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
inline double t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return std::isnan(t) ? t : 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

/// Two-sided p-value for a correlation coefficient via the t approximation.
inline double correlation_p(double r, std::size_t n) {
  if (n < 3 || std::isnan(r)) return std::numeric_limits<double>::quiet_NaN();
  const double df = static_cast<double>(n) - 2.0;
  if (std::abs(r) >= 1.0) return 0.0;
  return t_two_sided_p(r * std::sqrt(df / (1.0 - r * r)), df);
}

/// Empirical quantile with linear interpolation between order statistics
/// (type 7). `sorted` must be ascending and non-empty.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace latentpath::stats
