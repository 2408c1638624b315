#pragma once

// 0-100 composite index from a fitted block, with rankings and cross-model
// rank agreement.

#include "dataset.hpp"
#include "error.hpp"
#include "estimator.hpp"
#include "stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace latentpath {

struct IndexRow {
  Entity entity;
  double score = 0.0;
  int rank = 0;
  bool tied = false;
};

struct IndexTable {
  std::string model;
  std::string block;
  std::vector<IndexRow> rows;  ///< ordered by rank
  bool has_ties = false;
};

/// Block weights rescaled to sum to one. Throws when any rescaled weight is
/// negative, since the index would then fall as that manifest improves.
inline Eigen::VectorXd normalized_index_weights(const FitResult& fit, std::size_t block) {
  const Eigen::VectorXd w = fit.block_weights(block);
  const double s = w.sum();
  Eigen::VectorXd out = w / s;
  if (!(s > 0.0) || (out.array() < 0.0).any()) {
    throw NumericError("block '" + fit.model.blocks[block].name +
                       "' has a negative normalized outer weight; set the invert flag on the "
                       "offending manifest so that higher values mean better");
  }
  return out;
}

/// `scaled` holds the 0-100 manifests of the whole model (manifest order),
/// rows aligned with `entities`.
inline IndexTable build_index(const FitResult& fit, const Eigen::MatrixXd& scaled,
                              const std::vector<Entity>& entities, const std::string& block,
                              const std::string& model_label = "model") {
  const auto j = fit.model.block_index(block);
  if (scaled.rows() != static_cast<Eigen::Index>(entities.size()))
    throw InputError("index: scaled matrix rows do not match entity count");
  const Eigen::VectorXd w = normalized_index_weights(fit, j);
  const Eigen::VectorXd raw = scaled.middleCols(fit.offset(j), fit.width(j)) * w;
  const double top = raw.maxCoeff();
  if (!(top > 0.0)) throw NumericError("index: every raw score is zero");

  IndexTable t;
  t.model = model_label;
  t.block = block;
  std::vector<std::size_t> order(entities.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw[static_cast<Eigen::Index>(a)] > raw[static_cast<Eigen::Index>(b)];
  });
  int rank = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(order[k]);
    const bool same = k > 0 && raw[i] == raw[static_cast<Eigen::Index>(order[k - 1])];
    if (!same) ++rank;
    IndexRow row{entities[order[k]], 100.0 * raw[i] / top, rank, false};
    if (raw[i] == top) row.score = 100.0;
    if (same) {
      row.tied = true;
      t.rows.back().tied = true;
      t.has_ties = true;
    }
    t.rows.push_back(row);
  }
  return t;
}

inline IndexTable build_index(const FitResult& fit, const Dataset& d, const std::string& block,
                              const std::string& model_label = "model") {
  const Eigen::MatrixXd scaled =
      scale_0_100(d, fit.model.manifest_columns(), fit.model.manifest_inverted());
  return build_index(fit, scaled, d.entities, block, model_label);
}

struct RankCorrelation {
  std::vector<std::string> labels;
  Eigen::MatrixXd rho;
  Eigen::MatrixXd p_value;  ///< two-sided, t approximation
  std::size_t n = 0;        ///< size of the shared entity set
};

/// Pairwise Spearman correlation of index scores over the entities common to
/// every table.
inline RankCorrelation compare_indices(const std::vector<IndexTable>& tables) {
  if (tables.empty()) throw InputError("compare_indices: no tables");
  std::map<Entity, int> seen;
  for (const auto& t : tables)
    for (const auto& r : t.rows) ++seen[r.entity];
  std::vector<Entity> common;
  for (const auto& [e, c] : seen)
    if (c == static_cast<int>(tables.size())) common.push_back(e);
  if (common.size() < 3)
    throw InputError("compare_indices: tables share " + std::to_string(common.size()) +
                     " entities; the entity sets are (nearly) disjoint");

  const auto n = static_cast<Eigen::Index>(common.size());
  const auto k = static_cast<Eigen::Index>(tables.size());
  Eigen::MatrixXd s(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    std::map<Entity, double> by;
    for (const auto& r : tables[static_cast<std::size_t>(c)].rows) by[r.entity] = r.score;
    for (Eigen::Index i = 0; i < n; ++i) s(i, c) = by.at(common[static_cast<std::size_t>(i)]);
  }
  RankCorrelation out;
  out.n = common.size();
  for (const auto& t : tables) out.labels.push_back(t.model);
  out.rho = Eigen::MatrixXd::Identity(k, k);
  out.p_value = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const double r = stats::spearman(s.col(a), s.col(b));
      out.rho(a, b) = out.rho(b, a) = r;
      out.p_value(a, b) = out.p_value(b, a) = stats::correlation_p(r, out.n);
    }
  return out;
}

}  // namespace latentpath
