#include <latentpath/report.hpp>
#include <latentpath/testkit.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace latentpath;

namespace {

FitResult small_fit() {
  testkit::SynthSpec s;
  s.n = 80;
  s.seed = 11;
  s.blocks = {{"A", {0.8, 0.7, 0.75}, {}, 0.0, {}}, {"B", {0.9, 0.6}, {}, 0.0, {}}, {"C", {0.85}, {}, 0.0, {}}};
  s.paths = {{"A", "B", 0.5}, {"B", "C", 0.4}, {"A", "C", 0.2}};
  const auto syn = testkit::generate(s);
  return fit(syn.data, syn.truth.model);
}

double rel6(double a) { return std::abs(a) * 1e-6 + 1e-12; }

}  // namespace

TEST(Report, JsonRoundTripKeepsSixSignificantDigits) {
  const auto f = small_fit();
  const auto eff = decompose_effects(f.path_coefficients, f.model);
  for (const auto& t : {report::structural_table(f, eff), report::effects_table(eff)}) {
    const auto back = report::table_from_json(nlohmann::json::parse(report::to_json(t).dump()));
    ASSERT_EQ(back.rows.size(), t.rows.size());
    EXPECT_EQ(back.columns, t.columns);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
        const auto& a = t.rows[r][c];
        const auto& b = back.rows[r][c];
        if (std::holds_alternative<double>(a) && std::isfinite(std::get<double>(a))) {
          ASSERT_TRUE(std::holds_alternative<double>(b));
          EXPECT_NEAR(std::get<double>(b), std::get<double>(a), rel6(std::get<double>(a)));
        } else if (std::holds_alternative<std::string>(a) || std::holds_alternative<long long>(a)) {
          EXPECT_EQ(a, b);
        }
      }
    }
  }
}

TEST(Report, NonFiniteSurvivesJsonAsText) {
  report::Table t{"x", "x", {"v"}, {{report::num(std::nan(""))}, {report::count(3)}}, {}};
  const auto j = report::to_json(t);
  EXPECT_EQ(j["rows"][0][0], "NA");
  EXPECT_EQ(j["rows"][1][0], 3);
}

TEST(Report, TextUsesThreeDecimals) {
  report::Table t{"demo", "Demo", {"name", "value", "n"},
                  {{report::str("alpha"), report::num(0.59812), report::count(91)},
                   {report::str("beta"), report::num(-0.00001), report::count(7)}}, {"a note"}};
  std::ostringstream out;
  report::render_text(out, t);
  const auto s = out.str();
  EXPECT_NE(s.find("0.598"), std::string::npos);
  EXPECT_EQ(s.find("0.5981"), std::string::npos);
  EXPECT_NE(s.find(" 91"), std::string::npos);
  EXPECT_EQ(s.find("91.000"), std::string::npos);
  EXPECT_EQ(s.find("-0.000"), std::string::npos);
  EXPECT_NE(s.find("a note"), std::string::npos);
}

TEST(Report, CsvUsesFullPrecision) {
  report::Table t{"demo", "Demo", {"v"}, {{report::num(1.0 / 3.0)}}, {}};
  std::ostringstream out;
  report::render_csv(out, t);
  EXPECT_NE(out.str().find("0.33333333333333331"), std::string::npos);
}

TEST(Report, FitJsonCarriesConvergence) {
  const auto f = small_fit();
  const auto j = report::fit_to_json(f);
  EXPECT_TRUE(j.dump().find("converged") != std::string::npos);
}

TEST(Report, ResidualTableNameIsFileSafe) {
  ResidualCorrelation r;
  r.manifests = {"LE", "MR"};
  r.values = Eigen::Matrix2d::Identity();
  EXPECT_EQ(report::residual_table("Educ. achievements", r).name, "residuals_Educ__achievements");
}
