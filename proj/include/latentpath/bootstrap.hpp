#pragma once

// Nonparametric bootstrap over observations for inner path coefficients and
// total effects, with percentile confidence intervals.

#include "effects.hpp"
#include "error.hpp"
#include "estimator.hpp"
#include "rng.hpp"
#include "stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace latentpath {

struct BootSpec {
  int replicates = 500;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  unsigned threads = 0;  ///< 0: hardware concurrency. Never changes results.
  double max_failure_share = 0.2;

  void validate() const {
    if (replicates < 100) throw InputError("bootstrap needs at least 100 replicates for CIs");
    if (!(ci_level > 0.0 && ci_level < 1.0)) throw InputError("ci level must lie in (0, 1)");
  }
};

enum class ParamKind { Path, Total };

struct BootParameter {
  ParamKind kind = ParamKind::Path;
  std::string from;
  std::string to;
  double estimate = 0.0;
  double boot_mean = 0.0;
  double boot_sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool significant = false;  ///< zero lies outside [ci_low, ci_high]

  [[nodiscard]] std::string name() const {
    return std::string(kind == ParamKind::Path ? "path" : "total") + ":" + from + "->" + to;
  }
};

struct BootResult {
  std::vector<BootParameter> parameters;
  int replicates = 0;
  int valid_replicates = 0;
  double ci_level = 0.95;
  Eigen::VectorXd original_loadings;
  Eigen::VectorXd mean_loadings;  ///< average sign-aligned replicate loadings
};

namespace detail {

struct Replicate {
  bool ok = false;
  Eigen::VectorXd params;
  Eigen::VectorXd loadings;
};

struct ParamIndex {
  ParamKind kind;
  std::size_t from;
  std::size_t to;
};

inline Replicate run_replicate(const Eigen::MatrixXd& x, const ModelSpec& m, const FitResult& orig,
                               const std::vector<ParamIndex>& params, std::uint64_t seed,
                               std::uint64_t index) {
  Replicate rep;
  auto eng = stream_engine(seed, index);
  const auto n = x.rows();
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  Eigen::MatrixXd xr(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) xr.row(i) = x.row(pick(eng));
  FitResult f;
  try {
    f = fit(xr, m);
  } catch (const NumericError&) {
    return rep;
  } catch (const InputError&) {
    return rep;
  }
  if (!f.converged) return rep;

  // flip a block when its replicate loadings point against the originals
  const auto q = static_cast<Eigen::Index>(m.blocks.size());
  Eigen::VectorXd sign = Eigen::VectorXd::Ones(q);
  for (std::size_t j = 0; j < m.blocks.size(); ++j) {
    if (f.block_loadings(j).dot(orig.block_loadings(j)) < 0.0) {
      sign[static_cast<Eigen::Index>(j)] = -1.0;
      f.loadings.segment(f.offset(j), f.width(j)) *= -1.0;
    }
  }
  Eigen::MatrixXd b = f.path_coefficients;
  for (Eigen::Index r = 0; r < q; ++r)
    for (Eigen::Index c = 0; c < q; ++c) b(r, c) *= sign[r] * sign[c];
  const Eigen::MatrixXd tot = total_effects(b);

  rep.params.resize(static_cast<Eigen::Index>(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& p = params[k];
    const auto& src = p.kind == ParamKind::Path ? b : tot;
    rep.params[static_cast<Eigen::Index>(k)] =
        src(static_cast<Eigen::Index>(p.to), static_cast<Eigen::Index>(p.from));
  }
  rep.loadings = f.loadings;
  rep.ok = true;
  return rep;
}

}  // namespace detail

/// Resamples rows of the manifest matrix `x` (columns in manifest order),
/// refits, and summarizes every path coefficient and nonzero total effect.
/// Output depends only on (x, m, spec), never on thread scheduling.
inline BootResult bootstrap(const Eigen::MatrixXd& x, const ModelSpec& m, const BootSpec& spec) {
  spec.validate();
  const FitResult orig = fit(x, m);
  if (!orig.converged) throw NumericError("bootstrap: the original fit did not converge");

  std::vector<detail::ParamIndex> idx;
  for (const auto& p : m.paths)
    idx.push_back({ParamKind::Path, m.block_index(p.from), m.block_index(p.to)});
  const Eigen::MatrixXd orig_total = total_effects(orig.path_coefficients);
  const auto order = topological_indices(m);
  for (auto i : order)
    for (auto j : order)
      if (orig_total(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) != 0.0)
        idx.push_back({ParamKind::Total, i, j});

  const auto reps = static_cast<std::size_t>(spec.replicates);
  std::vector<detail::Replicate> results(reps);
  unsigned workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(reps));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r = next++; r < reps; r = next++)
      results[r] = detail::run_replicate(x, m, orig, idx, spec.seed, r);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }

  BootResult out;
  out.replicates = spec.replicates;
  out.ci_level = spec.ci_level;
  out.original_loadings = orig.loadings;
  out.mean_loadings = Eigen::VectorXd::Zero(orig.loadings.size());
  std::vector<std::vector<double>> draws(idx.size());
  for (const auto& r : results) {
    if (!r.ok) continue;
    ++out.valid_replicates;
    out.mean_loadings += r.loadings;
    for (std::size_t k = 0; k < idx.size(); ++k) draws[k].push_back(r.params[static_cast<Eigen::Index>(k)]);
  }
  const int failed = out.replicates - out.valid_replicates;
  if (failed > static_cast<int>(spec.max_failure_share * out.replicates)) {
    std::ostringstream msg;
    msg << "bootstrap: " << failed << " of " << out.replicates
        << " replicates failed (non-convergence or singular refit), above the "
        << spec.max_failure_share * 100.0 << "% limit";
    throw NumericError(msg.str());
  }
  out.mean_loadings /= static_cast<double>(out.valid_replicates);

  const double lo_p = (1.0 - spec.ci_level) / 2.0;
  const double hi_p = (1.0 + spec.ci_level) / 2.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    BootParameter p;
    p.kind = idx[k].kind;
    p.from = m.blocks[idx[k].from].name;
    p.to = m.blocks[idx[k].to].name;
    const auto& src = p.kind == ParamKind::Path ? orig.path_coefficients : orig_total;
    p.estimate = src(static_cast<Eigen::Index>(idx[k].to), static_cast<Eigen::Index>(idx[k].from));
    auto& d = draws[k];
    double sum = 0.0;
    for (double v : d) sum += v;
    p.boot_mean = sum / static_cast<double>(d.size());
    double ss = 0.0;
    for (double v : d) ss += (v - p.boot_mean) * (v - p.boot_mean);
    p.boot_sd = d.size() > 1 ? std::sqrt(ss / static_cast<double>(d.size() - 1)) : 0.0;
    std::sort(d.begin(), d.end());
    p.ci_low = stats::quantile_sorted(d, lo_p);
    p.ci_high = stats::quantile_sorted(d, hi_p);
    p.significant = p.ci_low > 0.0 || p.ci_high < 0.0;
    out.parameters.push_back(p);
  }
  return out;
}

}  // namespace latentpath
