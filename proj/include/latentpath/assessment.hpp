#pragma once

// Measurement- and structural-model diagnostics: unidimensionality indices,
// communality / redundancy / AVE, cross-loadings, goodness of fit, and the
// rule-of-thumb threshold screen.

#include "estimator.hpp"
#include "stats.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace latentpath {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct UnidimReport {
  std::string block;
  Mode mode = Mode::A;
  std::size_t mv_count = 0;
  double cronbach_alpha = kNaN;
  double dg_rho = kNaN;
  double eig1 = kNaN;
  double eig2 = kNaN;
  bool degenerate = false;  ///< single-manifest block, alpha and rho set to 1 by convention

  [[nodiscard]] bool unidimensional() const { return eig1 > 1.0 && eig2 < 1.0; }
};

struct ManifestQuality {
  std::string name;
  std::string block;
  double weight = kNaN;
  double loading = kNaN;
  double communality = kNaN;
  std::optional<double> redundancy;  ///< absent for exogenous blocks
};

struct BlockSummary {
  std::string name;
  bool endogenous = false;
  std::size_t mv_count = 0;
  double avg_communality = kNaN;
  double ave = kNaN;
  std::optional<double> r_squared;
  std::optional<double> avg_redundancy;
};

struct QualityReport {
  std::vector<ManifestQuality> manifests;
  std::vector<BlockSummary> blocks;
};

struct CrossLoadings {
  std::vector<std::string> manifests;
  std::vector<std::string> blocks;
  std::vector<std::size_t> own_block;
  Eigen::MatrixXd values;          ///< manifest x block correlations
  std::vector<bool> discriminant;  ///< own-block loading strictly largest in |.|
};

struct ResidualCorrelation {
  std::vector<std::string> manifests;
  Eigen::MatrixXd values;
  bool degenerate = false;  ///< some residual vanished; its correlations are reported as 0
};

/// Standardized alpha p r / (1 + (p - 1) r) from a correlation matrix, r the
/// mean off-diagonal entry. A single variable yields 1.
inline double cronbach_alpha_from_correlation(const Eigen::MatrixXd& r) {
  const double p = static_cast<double>(r.rows());
  if (r.rows() < 2) return 1.0;
  const double off = (r.sum() - r.trace()) / (p * (p - 1.0));
  return p * off / (1.0 + (p - 1.0) * off);
}

inline double cronbach_alpha(const Eigen::MatrixXd& block_data) {
  return cronbach_alpha_from_correlation(stats::correlation_matrix(block_data));
}

inline double dillon_goldstein_rho(const Eigen::Ref<const Eigen::VectorXd>& loadings) {
  const double s = loadings.sum();
  const double err = (1.0 - loadings.array().square()).sum();
  return s * s / (s * s + err);
}

struct Eigenpair2 {
  double eig1 = 0.0;
  double eig2 = 0.0;
  [[nodiscard]] bool unidimensional() const { return eig1 > 1.0 && eig2 < 1.0; }
};

/// The two largest eigenvalues of a correlation matrix (eig2 = 0 when 1x1).
inline Eigenpair2 eigenvalues_from_correlation(const Eigen::MatrixXd& r) {
  if (r.rows() == 1) return {r(0, 0), 0.0};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();  // ascending
  const auto p = ev.size();
  return {ev[p - 1], std::max(0.0, ev[p - 2])};
}

inline Eigenpair2 block_eigenvalues(const Eigen::MatrixXd& block_data) {
  return eigenvalues_from_correlation(stats::correlation_matrix(block_data));
}

/// Unidimensionality indices per block. `x` is the standardized manifest
/// matrix the model was fitted on.
inline std::vector<UnidimReport> unidimensionality(const FitResult& fit, const Eigen::MatrixXd& x) {
  std::vector<UnidimReport> out;
  for (std::size_t j = 0; j < fit.block_count(); ++j) {
    const auto& b = fit.model.blocks[j];
    UnidimReport u;
    u.block = b.name;
    u.mode = b.mode;
    u.mv_count = b.manifest.size();
    const Eigen::MatrixXd r = stats::correlation_matrix(x.middleCols(fit.offset(j), fit.width(j)));
    const auto eig = eigenvalues_from_correlation(r);
    u.eig1 = eig.eig1;
    u.eig2 = eig.eig2;
    if (u.mv_count == 1) {
      u.degenerate = true;
      u.cronbach_alpha = 1.0;
      u.dg_rho = 1.0;
    } else {
      u.cronbach_alpha = cronbach_alpha_from_correlation(r);
      if (b.mode == Mode::A) u.dg_rho = dillon_goldstein_rho(fit.block_loadings(j));
    }
    out.push_back(u);
  }
  return out;
}

/// Communality (loading squared), redundancy (communality times block R²),
/// and block averages. AVE equals the average communality for standardized
/// manifests.
inline QualityReport communality_redundancy(const FitResult& fit) {
  QualityReport q;
  for (std::size_t j = 0; j < fit.block_count(); ++j) {
    const auto& b = fit.model.blocks[j];
    BlockSummary s;
    s.name = b.name;
    s.endogenous = fit.model.is_endogenous(j);
    s.mv_count = b.manifest.size();
    if (s.endogenous) s.r_squared = fit.r_squared[static_cast<Eigen::Index>(j)];
    double comm_sum = 0.0;
    double red_sum = 0.0;
    for (Eigen::Index k = 0; k < fit.width(j); ++k) {
      const auto idx = fit.offset(j) + k;
      ManifestQuality mq;
      mq.name = fit.manifest_names[static_cast<std::size_t>(idx)];
      mq.block = b.name;
      mq.weight = fit.outer_weights[idx];
      mq.loading = fit.loadings[idx];
      mq.communality = mq.loading * mq.loading;
      if (s.r_squared) mq.redundancy = mq.communality * *s.r_squared;
      comm_sum += mq.communality;
      red_sum += mq.redundancy.value_or(0.0);
      q.manifests.push_back(mq);
    }
    const double p = static_cast<double>(s.mv_count);
    s.avg_communality = comm_sum / p;
    s.ave = s.avg_communality;
    if (s.r_squared) s.avg_redundancy = red_sum / p;
    q.blocks.push_back(s);
  }
  return q;
}

/// sqrt(mean average-communality over multi-manifest blocks x mean R² over
/// endogenous blocks).
inline double goodness_of_fit(std::span<const double> multi_block_communality,
                              std::span<const double> endogenous_r2) {
  if (multi_block_communality.empty() || endogenous_r2.empty()) return kNaN;
  double c = 0.0;
  for (double v : multi_block_communality) c += v;
  double r = 0.0;
  for (double v : endogenous_r2) r += v;
  c /= static_cast<double>(multi_block_communality.size());
  r /= static_cast<double>(endogenous_r2.size());
  return std::sqrt(c * r);
}

inline double goodness_of_fit(const QualityReport& q) {
  std::vector<double> comm;
  std::vector<double> r2;
  for (const auto& b : q.blocks) {
    if (b.mv_count >= 2) comm.push_back(b.avg_communality);
    if (b.endogenous && b.r_squared) r2.push_back(*b.r_squared);
  }
  return goodness_of_fit(comm, r2);
}

inline CrossLoadings cross_loadings(const FitResult& fit, const Eigen::MatrixXd& x) {
  CrossLoadings c;
  c.manifests = fit.manifest_names;
  c.own_block = fit.manifest_block;
  for (const auto& b : fit.model.blocks) c.blocks.push_back(b.name);
  const auto p = x.cols();
  const auto q = fit.scores.cols();
  c.values.resize(p, q);
  for (Eigen::Index k = 0; k < p; ++k) {
    const auto own = static_cast<Eigen::Index>(fit.manifest_block[static_cast<std::size_t>(k)]);
    for (Eigen::Index j = 0; j < q; ++j)
      c.values(k, j) = j == own ? fit.loadings[k] : stats::correlation(x.col(k), fit.scores.col(j));
    bool ok = true;
    for (Eigen::Index j = 0; j < q; ++j)
      if (j != own && !(std::abs(c.values(k, own)) > std::abs(c.values(k, j)))) ok = false;
    c.discriminant.push_back(ok);
  }
  return c;
}

/// Pairwise correlations of measurement residuals x_k - loading_k * score
/// inside one block.
inline ResidualCorrelation residual_orthogonality(const FitResult& fit, const Eigen::MatrixXd& x,
                                                  const std::string& block) {
  const auto j = fit.model.block_index(block);
  const auto off = fit.offset(j);
  const auto p = fit.width(j);
  if (p < 2) throw InputError("block '" + block + "' needs at least 2 manifests");
  ResidualCorrelation out;
  Eigen::MatrixXd e(x.rows(), p);
  std::vector<bool> vanished(static_cast<std::size_t>(p), false);
  for (Eigen::Index k = 0; k < p; ++k) {
    out.manifests.push_back(fit.manifest_names[static_cast<std::size_t>(off + k)]);
    e.col(k) = x.col(off + k) - fit.loadings[off + k] * fit.scores.col(static_cast<Eigen::Index>(j));
    if (stats::sd(e.col(k)) < 1e-8) {
      vanished[static_cast<std::size_t>(k)] = true;
      out.degenerate = true;
    }
  }
  out.values = Eigen::MatrixXd::Identity(p, p);
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = a + 1; b < p; ++b) {
      const bool dead = vanished[static_cast<std::size_t>(a)] || vanished[static_cast<std::size_t>(b)];
      out.values(a, b) = out.values(b, a) = dead ? 0.0 : stats::correlation(e.col(a), e.col(b));
    }
  for (Eigen::Index a = 0; a < p; ++a)
    if (vanished[static_cast<std::size_t>(a)]) out.values(a, a) = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Threshold screen

enum class Status { Pass, Warn, Fail };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Warn: return "warn";
    case Status::Fail: return "fail";
  }
  return "fail";
}

struct Verdict {
  std::string rule;
  std::string subject;
  double value = kNaN;
  double threshold = kNaN;
  Status status = Status::Fail;
  std::string note;
};

/// Everything the screen looks at. Fields left empty are skipped.
struct AssessmentReport {
  std::vector<UnidimReport> unidim;
  QualityReport quality;
  std::optional<CrossLoadings> cross;
  double gof = kNaN;
};

namespace thresholds {
inline constexpr double alpha = 0.7;
inline constexpr double rho = 0.7;
inline constexpr double loading = 0.7;
inline constexpr double loading_relaxed = 0.4;
inline constexpr double communality = 0.5;
inline constexpr double ave = 0.5;
inline constexpr double r_squared = 0.1;
inline constexpr double gof = 0.7;
}  // namespace thresholds

inline Status at_least(double v, double t) { return v >= t ? Status::Pass : Status::Fail; }

inline std::vector<Verdict> threshold_screen(const AssessmentReport& rep) {
  std::vector<Verdict> out;
  for (const auto& u : rep.unidim) {
    if (u.degenerate) {
      out.push_back({"unidimensionality", u.block, kNaN, kNaN, Status::Pass, "single indicator"});
      continue;
    }
    const auto a = at_least(u.cronbach_alpha, thresholds::alpha);
    out.push_back({"cronbach_alpha", u.block, u.cronbach_alpha, thresholds::alpha, a, ""});
    std::optional<Status> r;
    if (std::isfinite(u.dg_rho)) {
      r = at_least(u.dg_rho, thresholds::rho);
      out.push_back({"dg_rho", u.block, u.dg_rho, thresholds::rho, *r, ""});
    }
    const auto e = u.unidimensional() ? Status::Pass : Status::Fail;
    out.push_back({"eigenvalues", u.block, u.eig1, 1.0, e,
                   "eig1 " + std::to_string(u.eig1) + ", eig2 " + std::to_string(u.eig2)});
    // rho is loading-based and takes precedence over alpha when they disagree
    const Status reliab = r ? *r : a;
    Verdict block{"unidimensionality", u.block, kNaN, kNaN, Status::Fail, ""};
    if (reliab == Status::Pass && e == Status::Pass) {
      block.status = Status::Pass;
      if (a == Status::Fail) block.note = "accepted: dg_rho passes, alpha fails; rho governs";
    }
    out.push_back(block);
  }
  for (const auto& m : rep.quality.manifests) {
    Verdict v{"loading", m.name, m.loading, thresholds::loading, Status::Fail, ""};
    if (m.loading >= thresholds::loading) {
      v.status = Status::Pass;
    } else if (m.loading >= thresholds::loading_relaxed) {
      v.status = Status::Warn;
      v.note = "below 0.7, above the relaxed 0.4 rule";
    }
    out.push_back(v);
    out.push_back({"communality", m.name, m.communality, thresholds::communality,
                   at_least(m.communality, thresholds::communality), ""});
  }
  for (const auto& b : rep.quality.blocks) {
    out.push_back({"ave", b.name, b.ave, thresholds::ave, at_least(b.ave, thresholds::ave), ""});
    if (b.r_squared) {
      out.push_back({"r_squared", b.name, *b.r_squared, thresholds::r_squared,
                     at_least(*b.r_squared, thresholds::r_squared),
                     *b.r_squared >= thresholds::r_squared ? "informative" : "little information"});
    }
  }
  if (rep.cross) {
    for (std::size_t k = 0; k < rep.cross->manifests.size(); ++k) {
      const auto own = static_cast<Eigen::Index>(rep.cross->own_block[k]);
      out.push_back({"discriminant_validity", rep.cross->manifests[k],
                     rep.cross->values(static_cast<Eigen::Index>(k), own), kNaN,
                     rep.cross->discriminant[k] ? Status::Pass : Status::Fail, ""});
    }
  }
  if (std::isfinite(rep.gof))
    out.push_back({"gof", "model", rep.gof, thresholds::gof, at_least(rep.gof, thresholds::gof), ""});
  return out;
}

inline AssessmentReport assess(const FitResult& fit, const Eigen::MatrixXd& x) {
  AssessmentReport rep;
  rep.unidim = unidimensionality(fit, x);
  rep.quality = communality_redundancy(fit);
  rep.cross = cross_loadings(fit, x);
  rep.gof = goodness_of_fit(rep.quality);
  return rep;
}

}  // namespace latentpath
