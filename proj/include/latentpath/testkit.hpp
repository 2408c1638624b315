#pragma once

// Synthetic panels with a known latent structure. The generator runs the
// structural and measurement equations forward, so its truth record serves
// as the reference for estimator, assessment and bootstrap checks.

#include "dataset.hpp"
#include "effects.hpp"
#include "error.hpp"
#include "model_spec.hpp"
#include "rng.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace latentpath::testkit {

struct SynthBlock {
  std::string name;
  std::vector<double> loadings;
  std::vector<double> noise_sd;        ///< empty: sqrt(1 - loading^2), unit-variance manifests
  double residual_corr = 0.0;          ///< equicorrelation of measurement noise within the block
  std::vector<std::string> manifests;  ///< empty: "<name>_1", "<name>_2", ...
};

struct SynthPath {
  std::string from;
  std::string to;
  double beta = 0.0;
};

struct SynthSpec {
  int n = 200;
  std::uint64_t seed = 1;
  int year = 2000;
  std::vector<SynthBlock> blocks;
  std::vector<SynthPath> paths;
};

struct Truth {
  ModelSpec model;            ///< Mode A blocks and the generating DAG
  Eigen::VectorXd loadings;   ///< manifest order of `model`
  Eigen::MatrixXd paths;      ///< (to, from) layout
  Eigen::MatrixXd latent_corr;
  Eigen::MatrixXd latent;     ///< n x Q sampled latent scores
};

struct Synthetic {
  Dataset data;
  Truth truth;
};

inline std::vector<std::string> manifest_names(const SynthBlock& b) {
  if (!b.manifests.empty()) return b.manifests;
  std::vector<std::string> out;
  for (std::size_t k = 0; k < b.loadings.size(); ++k) out.push_back(b.name + "_" + std::to_string(k + 1));
  return out;
}

/// The ModelSpec implied by a synthetic spec (all blocks Mode A).
inline ModelSpec model_of(const SynthSpec& s) {
  ModelSpec m;
  for (const auto& b : s.blocks) {
    BlockSpec bs{b.name, {}, Mode::A};
    for (const auto& name : manifest_names(b)) bs.manifest.push_back({name, false});
    m.blocks.push_back(std::move(bs));
  }
  for (const auto& p : s.paths) m.paths.push_back({p.from, p.to});
  return m;
}

inline Synthetic generate(const SynthSpec& s) {
  if (s.n < 10) throw InputError("synthetic n must be at least 10");
  ModelSpec m = model_of(s);
  validate(m);
  for (const auto& b : s.blocks) {
    if (manifest_names(b).size() != b.loadings.size())
      throw InputError("block '" + b.name + "': manifest names and loadings differ in length");
    if (!b.noise_sd.empty() && b.noise_sd.size() != b.loadings.size())
      throw InputError("block '" + b.name + "': noise_sd and loadings differ in length");
    for (double l : b.loadings)
      if (std::abs(l) > 1.0) throw InputError("block '" + b.name + "': |loading| > 1");
  }

  const auto q = static_cast<Eigen::Index>(s.blocks.size());
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(q, q);
  for (const auto& p : s.paths)
    beta(static_cast<Eigen::Index>(m.block_index(p.to)), static_cast<Eigen::Index>(m.block_index(p.from))) = p.beta;

  // population latent correlations, filled in topological order
  const auto order = topological_indices(m);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(q, q);
  Eigen::VectorXd disturbance_sd = Eigen::VectorXd::Ones(q);
  std::vector<std::size_t> done;
  for (auto j : order) {
    const auto jj = static_cast<Eigen::Index>(j);
    const Eigen::RowVectorXd b = beta.row(jj);
    for (auto k : done) {
      const auto kk = static_cast<Eigen::Index>(k);
      sigma(jj, kk) = sigma(kk, jj) = b.dot(sigma.col(kk));
    }
    const double explained = b * sigma * b.transpose();
    if (explained > 1.0 + 1e-12) {
      throw InputError("block '" + s.blocks[j].name +
                       "': path coefficients explain more than unit variance; residual variance would be negative");
    }
    disturbance_sd[jj] = std::sqrt(std::max(0.0, 1.0 - explained));
    sigma(jj, jj) = 1.0;
    done.push_back(j);
  }

  auto eng = stream_engine(s.seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(s.n);
  Eigen::MatrixXd eta(n, q);
  for (auto j : order) {
    const auto jj = static_cast<Eigen::Index>(j);
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = disturbance_sd[jj] * normal(eng);
      for (Eigen::Index k = 0; k < q; ++k)
        if (beta(jj, k) != 0.0) v += beta(jj, k) * eta(i, k);
      eta(i, jj) = v;
    }
  }

  Synthetic out;
  out.truth.model = m;
  out.truth.paths = beta;
  out.truth.latent_corr = sigma;
  out.truth.latent = eta;
  const auto total = static_cast<Eigen::Index>(m.manifest_columns().size());
  out.truth.loadings.resize(total);
  out.data.columns = m.manifest_columns();
  out.data.values.resize(n, total);
  for (Eigen::Index i = 0; i < n; ++i) {
    char code[32];
    std::snprintf(code, sizeof code, "E%05ld", static_cast<long>(i + 1));
    out.data.entities.push_back({code, s.year});
  }

  Eigen::Index col = 0;
  for (std::size_t j = 0; j < s.blocks.size(); ++j) {
    const auto& b = s.blocks[j];
    const auto p = static_cast<Eigen::Index>(b.loadings.size());
    Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(p, p, b.residual_corr);
    corr.diagonal().setOnes();
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success) {
      throw InputError("block '" + b.name + "': residual_corr " + std::to_string(b.residual_corr) +
                       " makes the noise covariance indefinite; residual variance would be negative");
    }
    const Eigen::MatrixXd chol = llt.matrixL();
    Eigen::VectorXd sd(p);
    for (Eigen::Index k = 0; k < p; ++k) {
      const double l = b.loadings[static_cast<std::size_t>(k)];
      sd[k] = b.noise_sd.empty() ? std::sqrt(std::max(0.0, 1.0 - l * l)) : b.noise_sd[static_cast<std::size_t>(k)];
      if (sd[k] < 0.0) throw InputError("block '" + b.name + "': negative noise_sd");
      out.truth.loadings[col + k] = l;
    }
    Eigen::VectorXd u(p);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < p; ++k) u[k] = normal(eng);
      const Eigen::VectorXd e = chol * u;
      for (Eigen::Index k = 0; k < p; ++k)
        out.data.values(i, col + k) = b.loadings[static_cast<std::size_t>(k)] * eta(i, static_cast<Eigen::Index>(j)) + sd[k] * e[k];
    }
    col += p;
  }
  return out;
}

inline SynthSpec synth_from_json(const nlohmann::json& j) {
  SynthSpec s;
  try {
    s.n = j.value("n", 200);
    s.seed = j.at("seed").get<std::uint64_t>();
    s.year = j.value("year", 2000);
    for (const auto& jb : j.at("blocks")) {
      SynthBlock b;
      b.name = jb.at("name").get<std::string>();
      b.loadings = jb.at("loadings").get<std::vector<double>>();
      b.noise_sd = jb.value("noise_sd", std::vector<double>{});
      b.residual_corr = jb.value("residual_corr", 0.0);
      b.manifests = jb.value("manifests", std::vector<std::string>{});
      s.blocks.push_back(std::move(b));
    }
    for (const auto& jp : j.value("paths", nlohmann::json::array()))
      s.paths.push_back({jp.at("from").get<std::string>(), jp.at("to").get<std::string>(), jp.at("beta").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed synthetic spec: ") + e.what());
  }
  return s;
}

inline SynthSpec parse_synth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open synthetic spec '" + path + "'");
  try {
    return synth_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline nlohmann::json truth_to_json(const Truth& t) {
  nlohmann::json j;
  j["model"] = to_json(t.model);
  const auto names = t.model.manifest_columns();
  j["loadings"] = nlohmann::json::object();
  for (std::size_t k = 0; k < names.size(); ++k) j["loadings"][names[k]] = t.loadings[static_cast<Eigen::Index>(k)];
  j["paths"] = nlohmann::json::array();
  for (const auto& p : t.model.paths) {
    const auto f = static_cast<Eigen::Index>(t.model.block_index(p.from));
    const auto to = static_cast<Eigen::Index>(t.model.block_index(p.to));
    j["paths"].push_back({{"from", p.from}, {"to", p.to}, {"beta", t.paths(to, f)}});
  }
  const auto eff = decompose_effects(t.paths, t.model);
  j["total_effects"] = nlohmann::json::array();
  for (const auto& e : eff.rows) j["total_effects"].push_back({{"from", e.from}, {"to", e.to}, {"total", e.total}});
  j["latent_correlation"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < t.latent_corr.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(t.latent_corr.cols()));
    for (Eigen::Index c = 0; c < t.latent_corr.cols(); ++c) row[static_cast<std::size_t>(c)] = t.latent_corr(r, c);
    j["latent_correlation"].push_back(row);
  }
  return j;
}

}  // namespace latentpath::testkit
