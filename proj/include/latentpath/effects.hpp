#pragma once

// Direct / indirect / total effect decomposition of a recursive inner model.

#include "model_spec.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace latentpath {

struct Effect {
  std::string from;
  std::string to;
  double direct = 0.0;
  double indirect = 0.0;
  double total = 0.0;
};

struct EffectsTable {
  std::vector<Effect> rows;
  Eigen::MatrixXd total;  ///< (to, from) layout, like the path matrix
};

/// Sum of B^k for k = 1 .. Q-1. For a DAG the series terminates, so this is
/// the total-effect matrix in the same (to, from) layout as B.
inline Eigen::MatrixXd total_effects(const Eigen::MatrixXd& b) {
  const auto q = b.rows();
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(q, q);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(q, q);
  for (Eigen::Index k = 1; k < q; ++k) {
    power = power * b;
    total += power;
  }
  return total;
}

/// Effects for every ordered pair with a nonzero direct or total effect,
/// listed source-major in `order` (a topological order of block names).
inline EffectsTable decompose_effects(const Eigen::MatrixXd& b, const std::vector<std::string>& names,
                                      const std::vector<std::size_t>& order) {
  EffectsTable t;
  t.total = total_effects(b);
  for (auto i : order)
    for (auto j : order) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      const double d = b(jj, ii);
      const double tot = t.total(jj, ii);
      if (d == 0.0 && tot == 0.0) continue;
      t.rows.push_back({names[i], names[j], d, tot - d, tot});
    }
  return t;
}

inline EffectsTable decompose_effects(const Eigen::MatrixXd& b, const ModelSpec& m) {
  std::vector<std::string> names;
  for (const auto& blk : m.blocks) names.push_back(blk.name);
  return decompose_effects(b, names, topological_indices(m));
}

}  // namespace latentpath
