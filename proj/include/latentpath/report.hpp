#pragma once

// Tabular reports in the layouts of the usual PLS-PM appendix tables, with
// text (3 decimals), CSV and JSON (full precision) renderings.

#include "assessment.hpp"
#include "bootstrap.hpp"
#include "econometrics.hpp"
#include "effects.hpp"
#include "estimator.hpp"
#include "index_builder.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace latentpath::report {

using Cell = std::variant<std::monostate, std::string, double, long long>;

struct Table {
  std::string name;  ///< file stem, e.g. "weights_loadings"
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;
};

inline Cell num(double v) { return v; }
inline Cell num(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }
inline Cell str(std::string s) { return s; }
inline Cell count(std::size_t v) { return static_cast<long long>(v); }

// ---------------------------------------------------------------------------
// rendering

inline std::string format_number(double v, int decimals) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

inline std::string full_precision(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string cell_text(const Cell& c, int decimals) {
  if (std::holds_alternative<double>(c)) return format_number(std::get<double>(c), decimals);
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
  return "";
}

inline void render_text(std::ostream& out, const Table& t) {
  std::vector<std::vector<std::string>> cells;
  std::vector<bool> left(t.columns.size(), true);
  for (const auto& r : t.rows)
    for (std::size_t c = 0; c < r.size(); ++c)
      if (std::holds_alternative<double>(r[c]) || std::holds_alternative<long long>(r[c])) left[c] = false;
  std::vector<std::size_t> width(t.columns.size(), 0);
  for (std::size_t c = 0; c < t.columns.size(); ++c) width[c] = t.columns[c].size();
  for (const auto& r : t.rows) {
    std::vector<std::string> line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line.push_back(cell_text(r[c], 3));
      width[c] = std::max(width[c], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  out << t.title << '\n';
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      const std::string& s = line[c];
      const std::size_t pad = width[c] - s.size();
      if (c) out << "  ";
      if (left[c]) out << s << std::string(pad, ' ');
      else out << std::string(pad, ' ') << s;
    }
    out << '\n';
  };
  emit(t.columns);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
  for (const auto& line : cells) emit(line);
  for (const auto& n : t.notes) out << "Note: " << n << '\n';
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void render_csv(std::ostream& out, const Table& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << csv_escape(t.columns[c]);
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out << ',';
      if (std::holds_alternative<double>(r[c])) out << full_precision(std::get<double>(r[c]));
      else if (std::holds_alternative<long long>(r[c])) out << std::get<long long>(r[c]);
      else if (std::holds_alternative<std::string>(r[c])) out << csv_escape(std::get<std::string>(r[c]));
    }
    out << '\n';
  }
}

inline nlohmann::json to_json(const Table& t) {
  nlohmann::json j;
  j["name"] = t.name;
  j["title"] = t.title;
  j["columns"] = t.columns;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& c : r) {
      if (std::holds_alternative<double>(c)) {
        const double v = std::get<double>(c);
        if (std::isfinite(v)) row.push_back(v);
        else row.push_back(full_precision(v));  // JSON has no NaN/Inf
      } else if (std::holds_alternative<long long>(c)) {
        row.push_back(std::get<long long>(c));
      } else if (std::holds_alternative<std::string>(c)) {
        row.push_back(std::get<std::string>(c));
      } else {
        row.push_back(nullptr);
      }
    }
    j["rows"].push_back(row);
  }
  j["notes"] = t.notes;
  return j;
}

inline Table table_from_json(const nlohmann::json& j) {
  Table t;
  t.name = j.at("name").get<std::string>();
  t.title = j.value("title", std::string());
  t.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& jr : j.at("rows")) {
    std::vector<Cell> row;
    for (const auto& c : jr) {
      if (c.is_null()) row.emplace_back();
      else if (c.is_number_integer()) row.emplace_back(c.get<long long>());
      else if (c.is_number()) row.emplace_back(c.get<double>());
      else row.emplace_back(c.get<std::string>());
    }
    t.rows.push_back(std::move(row));
  }
  t.notes = j.value("notes", std::vector<std::string>{});
  return t;
}

// ---------------------------------------------------------------------------
// table builders

inline Table unidimensionality_table(const std::vector<UnidimReport>& u) {
  Table t{"unidimensionality", "Assessing unidimensionality",
          {"block", "mode", "mv", "cronbach_alpha", "dg_rho", "eig1", "eig2"}, {}, {}};
  for (const auto& r : u) {
    t.rows.push_back({str(r.block), str(to_string(r.mode)), count(r.mv_count),
                      num(r.cronbach_alpha), num(r.dg_rho), num(r.eig1), num(r.eig2)});
    if (r.degenerate) t.notes.push_back(r.block + ": single indicator, alpha and rho set to 1");
  }
  return t;
}

inline Table weights_loadings_table(const QualityReport& q) {
  Table t{"weights_loadings", "Outer model: weights, loadings, communality, redundancy",
          {"mv", "block", "weight", "loading", "communality", "redundancy"}, {}, {}};
  for (const auto& m : q.manifests)
    t.rows.push_back({str(m.name), str(m.block), num(m.weight), num(m.loading), num(m.communality),
                      num(m.redundancy)});
  return t;
}

inline Table cross_loadings_table(const CrossLoadings& c) {
  Table t{"cross_loadings", "Discriminant validity: cross-loadings", {"mv", "block"}, {}, {}};
  for (const auto& b : c.blocks) t.columns.push_back(b);
  t.columns.push_back("own_block_highest");
  for (std::size_t k = 0; k < c.manifests.size(); ++k) {
    std::vector<Cell> row{str(c.manifests[k]), str(c.blocks[c.own_block[k]])};
    for (Eigen::Index j = 0; j < c.values.cols(); ++j) row.push_back(num(c.values(static_cast<Eigen::Index>(k), j)));
    row.push_back(str(c.discriminant[k] ? "yes" : "no"));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table inner_model_table(const QualityReport& q, double gof) {
  Table t{"inner_model", "Inner model assessment",
          {"block", "type", "r_squared", "avg_communality", "avg_redundancy", "ave"}, {}, {}};
  for (const auto& b : q.blocks)
    t.rows.push_back({str(b.name), str(b.endogenous ? "Endogenous" : "Exogenous"), num(b.r_squared),
                      num(b.avg_communality), num(b.avg_redundancy), num(b.ave)});
  t.rows.push_back({str("GoF"), Cell{}, num(gof), Cell{}, Cell{}, Cell{}});
  return t;
}

/// Coefficients with classical OLS standard errors, grouped by target block,
/// followed by the direct / indirect / total decomposition and R².
inline Table structural_table(const FitResult& fit, const EffectsTable& eff) {
  Table t{"structural", "Structural model: coefficients and effects",
          {"from", "to", "coefficient", "std_error", "p_value", "sig", "direct", "indirect", "total"},
          {},
          {"Standard errors are classical OLS on standardized scores. ** p < 0.05, *** p < 0.01."}};
  const auto& m = fit.model;
  const auto n = static_cast<double>(fit.scores.rows());
  for (auto j : topological_indices(m)) {
    if (!m.is_endogenous(j)) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    const double df = n - static_cast<double>(m.predecessors(j).size()) - 1.0;
    for (const auto& e : eff.rows) {
      if (e.to != m.blocks[j].name) continue;
      const auto i = static_cast<Eigen::Index>(m.block_index(e.from));
      std::vector<Cell> row{str(e.from), str(e.to)};
      if (m.has_path(static_cast<std::size_t>(i), j)) {
        const double b = fit.path_coefficients(jj, i);
        const double se = fit.path_std_errors(jj, i);
        const double p = stats::t_two_sided_p(b / se, df);
        row.insert(row.end(), {num(b), num(se), num(p), str(stars(p)), num(e.direct)});
      } else {
        row.insert(row.end(), {Cell{}, Cell{}, Cell{}, Cell{}, Cell{}});
      }
      row.push_back(e.indirect != 0.0 ? num(e.indirect) : Cell{});
      row.push_back(num(e.total));
      t.rows.push_back(std::move(row));
    }
    t.rows.push_back({str("R2"), str(m.blocks[j].name), num(fit.r_squared[jj]), Cell{}, Cell{}, Cell{},
                      Cell{}, Cell{}, Cell{}});
  }
  return t;
}

inline Table effects_table(const EffectsTable& eff) {
  Table t{"effects", "Direct, indirect and total effects", {"from", "to", "direct", "indirect", "total"}, {}, {}};
  for (const auto& e : eff.rows)
    t.rows.push_back({str(e.from), str(e.to), num(e.direct), num(e.indirect), num(e.total)});
  return t;
}

inline Table bootstrap_table(const BootResult& b) {
  char level[32];
  std::snprintf(level, sizeof level, "%g%%", b.ci_level * 100.0);
  Table t{"bootstrap", std::string("Bootstrap percentile intervals (") + level + ")",
          {"parameter", "estimate", "boot_mean", "boot_sd", "ci_low", "ci_high", "significant", "mark"},
          {},
          {"valid replicates: " + std::to_string(b.valid_replicates) + " of " + std::to_string(b.replicates),
           "† marks total effects whose interval excludes zero"}};
  for (const auto& p : b.parameters) {
    const bool dagger = p.kind == ParamKind::Total && p.significant;
    t.rows.push_back({str(p.name()), num(p.estimate), num(p.boot_mean), num(p.boot_sd), num(p.ci_low),
                      num(p.ci_high), str(p.significant ? "yes" : "no"), str(dagger ? "†" : "")});
  }
  return t;
}

inline Table index_table(const std::vector<IndexTable>& tables) {
  Table t{"index", "Composite index scores (0-100) by entity", {"model", "rank", "entity", "score", "tied"}, {}, {}};
  for (const auto& it : tables) {
    for (const auto& r : it.rows)
      t.rows.push_back({str(it.model), count(static_cast<std::size_t>(r.rank)), str(to_string(r.entity)), num(r.score),
                        str(r.tied ? "yes" : "")});
    if (it.has_ties) t.notes.push_back(it.model + ": tied scores share a rank");
  }
  return t;
}

inline Table correlation_table(const std::string& name, const std::string& title,
                               const std::vector<std::string>& labels, const Eigen::MatrixXd& rho,
                               const Eigen::MatrixXd& p, std::size_t n) {
  Table t{name, title, {"variable"}, {}, {"Spearman's rho; * significant at 1%; n = " + std::to_string(n)}};
  for (const auto& l : labels) t.columns.push_back(l);
  for (const auto& l : labels) t.columns.push_back("sig_" + l);
  for (std::size_t a = 0; a < labels.size(); ++a) {
    std::vector<Cell> row{str(labels[a])};
    for (std::size_t b = 0; b < labels.size(); ++b)
      row.push_back(num(rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))));
    for (std::size_t b = 0; b < labels.size(); ++b) {
      const double pv = p(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      row.push_back(str(a != b && pv < 0.01 ? "*" : ""));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table regression_table(const RegressionResult& r) {
  Table t{"regression", "Dependent variable: " + r.dependent,
          {"term", "coefficient", "std_error", "t", "p_value", "sig"},
          {},
          {"Standard errors: " + to_string(r.covariance) + ". ** p < 0.05, *** p < 0.01."}};
  auto add = [&](const Coefficient& c) {
    t.rows.push_back({str(c.name), num(c.estimate), num(c.se), num(c.t), num(c.p), str(stars(c.p))});
  };
  for (const auto& c : r.terms) add(c);
  add(r.intercept);
  t.rows.push_back({str("R2"), num(r.r_squared), Cell{}, Cell{}, Cell{}, Cell{}});
  t.rows.push_back({str("Observations"), count(r.n), Cell{}, Cell{}, Cell{}, Cell{}});
  return t;
}

inline Table verdict_table(const std::vector<Verdict>& v) {
  Table t{"screen", "Threshold screen", {"rule", "subject", "value", "threshold", "status", "note"}, {}, {}};
  for (const auto& x : v)
    t.rows.push_back({str(x.rule), str(x.subject), num(x.value), num(x.threshold), str(to_string(x.status)),
                      str(x.note)});
  return t;
}

/// File-safe stem: anything outside [A-Za-z0-9_-] becomes '_'.
inline std::string file_stem(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
  return s;
}

inline Table residual_table(const std::string& block, const ResidualCorrelation& r) {
  Table t{"residuals_" + file_stem(block), "Measurement-residual correlations: " + block, {"mv"}, {}, {}};
  for (const auto& m : r.manifests) t.columns.push_back(m);
  for (std::size_t a = 0; a < r.manifests.size(); ++a) {
    std::vector<Cell> row{str(r.manifests[a])};
    for (std::size_t b = 0; b < r.manifests.size(); ++b)
      row.push_back(num(r.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))));
    t.rows.push_back(std::move(row));
  }
  if (r.degenerate) t.notes.push_back("a residual vanished; its correlations are reported as 0");
  return t;
}

/// FitResult as a JSON document (full precision).
inline nlohmann::json fit_to_json(const FitResult& f) {
  nlohmann::json j;
  j["converged"] = f.converged;
  j["iterations"] = f.iterations;
  j["last_change"] = f.last_change;
  j["scheme"] = to_string(f.model.scheme);
  j["warnings"] = f.warnings;
  j["manifests"] = nlohmann::json::array();
  for (std::size_t k = 0; k < f.manifest_names.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    j["manifests"].push_back({{"name", f.manifest_names[k]},
                              {"block", f.model.blocks[f.manifest_block[k]].name},
                              {"weight", f.outer_weights[kk]},
                              {"loading", f.loadings[kk]}});
  }
  j["paths"] = nlohmann::json::array();
  for (const auto& p : f.model.paths) {
    const auto from = static_cast<Eigen::Index>(f.model.block_index(p.from));
    const auto to = static_cast<Eigen::Index>(f.model.block_index(p.to));
    j["paths"].push_back({{"from", p.from}, {"to", p.to}, {"coefficient", f.path_coefficients(to, from)},
                          {"std_error", f.path_std_errors(to, from)}});
  }
  j["r_squared"] = nlohmann::json::object();
  for (std::size_t b = 0; b < f.block_count(); ++b)
    if (f.model.is_endogenous(b)) j["r_squared"][f.model.blocks[b].name] = f.r_squared[static_cast<Eigen::Index>(b)];
  return j;
}

}  // namespace latentpath::report
