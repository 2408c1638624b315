#pragma once

// Reference computations used only by the tests. Each one takes a different
// route from the library code it checks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

/// Pearson correlation with plain loops.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Ranks by sorting (inputs must be tie-free), then Pearson on the ranks.
inline double rank_then_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  auto rank = [](const std::vector<double>& v) {
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      r[i] = static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), v[i]) - sorted.begin()) + 1.0;
    return r;
  };
  return pearson(rank(a), rank(b));
}

/// Two-regressor (no intercept) OLS by explicit 2x2 inversion of X'X.
inline std::pair<double, double> normal_equations_2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  double a = 0, b = 0, d = 0, u = 0, v = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    a += x(i, 0) * x(i, 0);
    b += x(i, 0) * x(i, 1);
    d += x(i, 1) * x(i, 1);
    u += x(i, 0) * y[i];
    v += x(i, 1) * y[i];
  }
  const double det = a * d - b * b;
  return {(d * u - b * v) / det, (a * v - b * u) / det};
}

struct Sandwich {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
};

/// OLS through (X'X)^-1 X'y and the HC1 sandwich assembled term by term.
inline Sandwich hc1_sandwich(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto n = x.rows();
  const auto k = x.cols();
  const Eigen::MatrixXd bread = (x.transpose() * x).inverse();
  Sandwich s;
  s.beta = bread * (x.transpose() * y);
  const Eigen::VectorXd e = y - x * s.beta;
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < n; ++i) meat += e[i] * e[i] * x.row(i).transpose() * x.row(i);
  const Eigen::MatrixXd v = bread * meat * bread * (static_cast<double>(n) / static_cast<double>(n - k));
  s.se = v.diagonal().array().sqrt();
  return s;
}

/// Total effect matrix (to, from) by summing edge products over every
/// directed path, found by exhaustive depth-first search.
inline Eigen::MatrixXd path_enumeration_totals(const Eigen::MatrixXd& b) {
  const auto q = b.rows();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(q, q);
  std::function<void(Eigen::Index, Eigen::Index, double)> walk = [&](Eigen::Index src, Eigen::Index at, double prod) {
    for (Eigen::Index nxt = 0; nxt < q; ++nxt) {
      if (b(nxt, at) == 0.0) continue;
      const double p = prod * b(nxt, at);
      t(nxt, src) += p;
      walk(src, nxt, p);
    }
  };
  for (Eigen::Index s = 0; s < q; ++s) walk(s, s, 1.0);
  return t;
}

struct GridFixedPoint {
  Eigen::Vector2d w_a;  ///< unit norm
  Eigen::Vector2d w_b;
  double residual;
};

/// Two blocks of two standardized manifests linked by one path. Searches
/// unit weight directions (angles on [0, pi), step `step`) for the pair that
/// best satisfies w_a ∝ corr(X_a, Y_b) and w_b ∝ corr(X_b, Y_a), working only
/// with the sample correlation matrix.
inline GridFixedPoint grid_fixed_point(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb, double step = 1e-3) {
  const auto n = static_cast<double>(xa.rows());
  auto standardize = [&](Eigen::MatrixXd m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m.col(c).array() -= m.col(c).mean();
      m.col(c) /= std::sqrt(m.col(c).squaredNorm() / n);
    }
    return m;
  };
  const Eigen::MatrixXd za = standardize(xa);
  const Eigen::MatrixXd zb = standardize(xb);
  const Eigen::Matrix2d raa = za.transpose() * za / n;
  const Eigen::Matrix2d rbb = zb.transpose() * zb / n;
  const Eigen::Matrix2d rab = za.transpose() * zb / n;

  // direction mismatch between w and v, ignoring sign
  auto mismatch = [](const Eigen::Vector2d& w, const Eigen::Vector2d& v) {
    const Eigen::Vector2d u = v.normalized();
    return std::min((w - u).norm(), (w + u).norm());
  };
  const int steps = static_cast<int>(std::numbers::pi / step);
  std::vector<Eigen::Vector2d> dirs(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) dirs[static_cast<std::size_t>(i)] = {std::cos(i * step), std::sin(i * step)};

  GridFixedPoint best{dirs[0], dirs[0], INFINITY};
  for (const auto& wa : dirs) {
    // corr(X_b, Y_a) up to positive scale
    const Eigen::Vector2d target_b = rab.transpose() * wa / std::sqrt(wa.dot(raa * wa));
    for (const auto& wb : dirs) {
      const double rb = mismatch(wb, target_b);
      if (rb >= best.residual) continue;
      const Eigen::Vector2d target_a = rab * wb / std::sqrt(wb.dot(rbb * wb));
      const double r = rb + mismatch(wa, target_a);
      if (r < best.residual) best = {wa, wb, r};
    }
  }
  return best;
}

}  // namespace oracle
