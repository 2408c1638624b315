// latentpath: command-line front end for PLS path-model estimation,
// assessment, bootstrap, index building, growth regressions and simulation.

#include <latentpath/latentpath.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
namespace lp = latentpath;
using lp::report::Table;

namespace {

struct RunConfig {
  std::string data;
  std::vector<std::string> models;
  std::optional<int> year;
  std::string id_col = "country";
  std::string year_col = "year";
  std::string scheme;
  std::optional<double> tol;
  std::optional<int> max_iter;
  int boot = 500;
  std::optional<std::uint64_t> seed;
  double ci = 0.95;
  unsigned threads = 0;
  std::string out = ".";
  std::string format = "text";
  std::string block;
  std::string spec;
};

class Output {
 public:
  Output(const std::string& dir, const std::string& format) : dir_(dir), format_(format) {
    fs::create_directories(dir_);
  }

  void add(Table t) { tables_.push_back(std::move(t)); }
  void set_extra(const std::string& key, nlohmann::json v) { extra_[key] = std::move(v); }

  std::vector<fs::path> write() const {
    std::vector<fs::path> written;
    if (format_ == "json") {
      nlohmann::json doc = extra_;
      doc["tables"] = nlohmann::json::array();
      for (const auto& t : tables_) doc["tables"].push_back(lp::report::to_json(t));
      const auto p = dir_ / "report.json";
      std::ofstream(p) << doc.dump(2) << '\n';
      written.push_back(p);
      return written;
    }
    for (const auto& t : tables_) {
      const auto p = dir_ / (t.name + (format_ == "csv" ? ".csv" : ".txt"));
      std::ofstream f(p);
      if (format_ == "csv") lp::report::render_csv(f, t);
      else lp::report::render_text(f, t);
      written.push_back(p);
    }
    return written;
  }

 private:
  fs::path dir_;
  std::string format_;
  std::vector<Table> tables_;
  nlohmann::json extra_ = nlohmann::json::object();
};

lp::ModelSpec load_model(const RunConfig& cfg, const std::string& path) {
  auto m = lp::parse_model(path);
  if (!cfg.scheme.empty()) m.scheme = lp::parse_scheme(cfg.scheme);
  if (cfg.tol) m.tol = *cfg.tol;
  if (cfg.max_iter) m.max_iter = *cfg.max_iter;
  lp::validate(m);
  return m;
}

lp::Dataset load_data(const RunConfig& cfg) {
  if (cfg.data.empty()) throw lp::InputError("--data is required");
  return lp::load_csv(cfg.data, {cfg.id_col, cfg.year_col}, cfg.year);
}

struct Prepared {
  lp::ModelSpec model;
  lp::Dataset data;
  Eigen::MatrixXd x;
};

Prepared prepare(const RunConfig& cfg, const lp::Dataset& raw, const std::string& model_path) {
  Prepared p;
  p.model = load_model(cfg, model_path);
  auto cc = lp::complete_cases(raw, p.model.manifest_columns());
  if (cc.dropped > 0)
    std::cerr << "note: dropped " << cc.dropped << " incomplete row(s), " << cc.data.rows() << " remain\n";
  p.data = std::move(cc.data);
  p.x = lp::manifest_matrix(p.data, p.model);
  return p;
}

const std::string& single_model(const RunConfig& cfg) {
  if (cfg.models.empty()) throw lp::InputError("--model is required");
  if (cfg.models.size() > 1) throw lp::InputError("this command takes exactly one --model");
  return cfg.models.front();
}

void add_fit_tables(Output& out, const lp::FitResult& f, const lp::AssessmentReport& rep) {
  const auto eff = lp::decompose_effects(f.path_coefficients, f.model);
  out.add(lp::report::weights_loadings_table(rep.quality));
  out.add(lp::report::unidimensionality_table(rep.unidim));
  out.add(lp::report::inner_model_table(rep.quality, rep.gof));
  out.add(lp::report::cross_loadings_table(*rep.cross));
  out.add(lp::report::structural_table(f, eff));
  out.set_extra("fit", lp::report::fit_to_json(f));
}

int finish_fit(const lp::FitResult& f) {
  for (const auto& w : f.warnings) std::cerr << "warning: " << w << '\n';
  if (!f.converged) {
    std::cerr << "error: estimation did not converge\n";
    return 2;
  }
  return 0;
}

int cmd_fit(const RunConfig& cfg, bool full_assessment) {
  const auto raw = load_data(cfg);
  const auto p = prepare(cfg, raw, single_model(cfg));
  const auto f = lp::fit(p.x, p.model);
  const auto rep = lp::assess(f, p.x);
  Output out(cfg.out, cfg.format);
  add_fit_tables(out, f, rep);
  if (full_assessment) {
    out.add(lp::report::effects_table(lp::decompose_effects(f.path_coefficients, f.model)));
    out.add(lp::report::verdict_table(lp::threshold_screen(rep)));
    for (const auto& b : p.model.blocks)
      if (b.manifest.size() >= 2)
        out.add(lp::report::residual_table(b.name, lp::residual_orthogonality(f, p.x, b.name)));
  }
  out.write();
  return finish_fit(f);
}

int cmd_bootstrap(const RunConfig& cfg) {
  const auto raw = load_data(cfg);
  const auto p = prepare(cfg, raw, single_model(cfg));
  lp::BootSpec spec;
  spec.replicates = cfg.boot;
  spec.ci_level = cfg.ci;
  spec.seed = *cfg.seed;
  spec.threads = cfg.threads;
  const auto res = lp::bootstrap(p.x, p.model, spec);
  Output out(cfg.out, cfg.format);
  out.add(lp::report::bootstrap_table(res));
  out.write();
  return 0;
}

int cmd_index(const RunConfig& cfg) {
  if (cfg.models.empty()) throw lp::InputError("--model is required");
  const auto raw = load_data(cfg);
  std::vector<lp::IndexTable> tables;
  bool converged = true;
  for (const auto& path : cfg.models) {
    const auto p = prepare(cfg, raw, path);
    const auto f = lp::fit(p.x, p.model);
    converged = converged && f.converged;
    for (const auto& w : f.warnings) std::cerr << "warning: " << path << ": " << w << '\n';
    std::string block = cfg.block;
    if (block.empty()) block = lp::topological_order(p.model).back();
    tables.push_back(lp::build_index(f, p.data, block, fs::path(path).stem().string()));
  }
  Output out(cfg.out, cfg.format);
  out.add(lp::report::index_table(tables));
  if (tables.size() > 1) {
    const auto rc = lp::compare_indices(tables);
    out.add(lp::report::correlation_table("index_correlation", "Rank agreement between index variants",
                                          rc.labels, rc.rho, rc.p_value, rc.n));
  }
  out.write();
  return converged ? 0 : 2;
}

int cmd_regress(const RunConfig& cfg) {
  if (cfg.spec.empty()) throw lp::InputError("--spec is required for regress");
  const auto raw = load_data(cfg);
  const auto spec = lp::parse_regression(cfg.spec);
  Output out(cfg.out, cfg.format);
  out.add(lp::report::regression_table(lp::ols_robust(raw, spec)));
  if (!spec.spearman.empty()) {
    const auto cm = lp::spearman_matrix(raw, spec.spearman);
    out.add(lp::report::correlation_table("spearman", "Spearman rank correlations", cm.labels, cm.rho,
                                          cm.p_value, cm.n));
  }
  out.write();
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  if (cfg.spec.empty()) throw lp::InputError("--spec is required for simulate");
  const auto s = lp::testkit::parse_synth(cfg.spec);
  const auto syn = lp::testkit::generate(s);
  fs::create_directories(cfg.out);
  {
    std::ofstream f(fs::path(cfg.out) / "data.csv");
    lp::write_csv(f, syn.data, {cfg.id_col, cfg.year_col});
  }
  {
    std::ofstream f(fs::path(cfg.out) / "truth.json");
    f << lp::testkit::truth_to_json(syn.truth).dump(2) << '\n';
  }
  {
    std::ofstream f(fs::path(cfg.out) / "model.json");
    f << lp::to_json(syn.truth.model).dump(2) << '\n';
  }
  return 0;
}

void add_common(CLI::App* sub, RunConfig& cfg, bool needs_model) {
  sub->add_option("--data", cfg.data, "CSV panel (header row, comma separated)");
  if (needs_model) sub->add_option("--model", cfg.models, "model JSON file")->take_all();
  sub->add_option("--year", cfg.year, "keep only rows of this year");
  sub->add_option("--id-col", cfg.id_col, "entity key column")->capture_default_str();
  sub->add_option("--year-col", cfg.year_col, "year column (empty for none)")->capture_default_str();
  sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
  sub->add_option("--format", cfg.format, "text, csv or json")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();
  if (needs_model) {
    sub->add_option("--scheme", cfg.scheme, "inner scheme")->check(CLI::IsMember({"centroid", "factorial", "path"}));
    sub->add_option("--tol", cfg.tol, "convergence tolerance on outer weights");
    sub->add_option("--max-iter", cfg.max_iter, "maximum sweeps");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PLS path-model engine for composite indices"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* fit = app.add_subcommand("fit", "estimate the model and write the five report tables");
  add_common(fit, cfg, true);
  auto* assess = app.add_subcommand("assess", "fit plus threshold screen, effects and residual diagnostics");
  add_common(assess, cfg, true);
  auto* boot = app.add_subcommand("bootstrap", "percentile bootstrap for paths and total effects");
  add_common(boot, cfg, true);
  boot->add_option("--boot", cfg.boot, "replicates")->capture_default_str();
  boot->add_option("--seed", cfg.seed, "RNG seed")->required();
  boot->add_option("--ci", cfg.ci, "confidence level")->capture_default_str();
  boot->add_option("--threads", cfg.threads, "worker threads (0: all cores)");
  auto* index = app.add_subcommand("index", "0-100 index and ranking for one or more models");
  add_common(index, cfg, true);
  index->add_option("--block", cfg.block, "target block (default: last in topological order)");
  auto* regress = app.add_subcommand("regress", "OLS with robust standard errors and Spearman table");
  add_common(regress, cfg, false);
  regress->add_option("--spec", cfg.spec, "regression spec JSON")->required();
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic panel with known structure");
  add_common(simulate, cfg, false);
  simulate->add_option("--spec", cfg.spec, "synthetic spec JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (fit->parsed()) return cmd_fit(cfg, false);
    if (assess->parsed()) return cmd_fit(cfg, true);
    if (boot->parsed()) return cmd_bootstrap(cfg);
    if (index->parsed()) return cmd_index(cfg);
    if (regress->parsed()) return cmd_regress(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
  } catch (const lp::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const lp::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
