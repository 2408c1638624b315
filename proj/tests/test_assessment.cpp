#include <latentpath/assessment.hpp>
#include <latentpath/testkit.hpp>

#include <gtest/gtest.h>

#include <map>
#include <random>

using namespace latentpath;

namespace {

Eigen::MatrixXd corr2(double r) {
  Eigen::MatrixXd m(2, 2);
  m << 1, r, r, 1;
  return m;
}

testkit::SynthSpec five_blocks(int n, std::uint64_t seed) {
  testkit::SynthSpec s;
  s.n = n;
  s.seed = seed;
  s.blocks = {{"Socio", {0.85, 0.9}, {}, 0.0, {}},
              {"Household", {1.0}, {}, 0.0, {}},
              {"Educ", {0.9, 0.8}, {}, 0.0, {}},
              {"Health", {0.95, 0.95}, {}, 0.0, {}},
              {"HC", {0.9, 0.9}, {}, 0.0, {}}};
  s.paths = {{"Socio", "Household", -0.5}, {"Household", "Educ", -0.3}, {"Socio", "Educ", 0.3},
             {"Household", "Health", -0.1}, {"Socio", "Health", 0.2}, {"Educ", "Health", 0.4},
             {"Health", "HC", 0.4}, {"Educ", "HC", 0.3}};
  return s;
}

struct Fitted {
  testkit::Synthetic syn;
  Eigen::MatrixXd x;
  FitResult fit;
};

Fitted fit_synth(const testkit::SynthSpec& s) {
  Fitted f{testkit::generate(s), {}, {}};
  f.x = manifest_matrix(f.syn.data, f.syn.truth.model);
  f.fit = fit(f.x, f.syn.truth.model);
  return f;
}

}  // namespace

TEST(CronbachAlpha, TwoIndicatorReferenceRow) {
  EXPECT_NEAR(cronbach_alpha_from_correlation(corr2(0.4265)), 0.598, 0.001);
  EXPECT_NEAR(cronbach_alpha_from_correlation(corr2(1.0)), 1.0, 1e-15);
  Eigen::MatrixXd r3 = Eigen::MatrixXd::Constant(3, 3, 0.5);
  r3.diagonal().setOnes();
  EXPECT_NEAR(cronbach_alpha_from_correlation(r3), 0.75, 1e-15);
  EXPECT_EQ(cronbach_alpha_from_correlation(Eigen::MatrixXd::Ones(1, 1)), 1.0);
}

TEST(CronbachAlpha, TwoIndicatorClosedFormProperty) {
  for (double r = -0.9; r <= 0.95; r += 0.05) {
    EXPECT_NEAR(cronbach_alpha_from_correlation(corr2(r)), 2 * r / (1 + r), 1e-12);
    const auto e = eigenvalues_from_correlation(corr2(r));
    EXPECT_NEAR(e.eig1, 1 + std::abs(r), 1e-12);
  }
}

TEST(DillonGoldstein, Examples) {
  EXPECT_NEAR(dillon_goldstein_rho(Eigen::Vector2d(0.819, 0.868)), 0.833, 0.005);
  EXPECT_NEAR(dillon_goldstein_rho(Eigen::Vector2d(1.0, 1.0)), 1.0, 1e-15);
  EXPECT_NEAR(dillon_goldstein_rho(Eigen::Vector3d(0.7, 0.7, 0.7)), 4.41 / (4.41 + 1.53), 1e-12);
  EXPECT_NEAR(dillon_goldstein_rho(Eigen::Vector3d(0.7, 0.7, 0.7)), 0.742, 0.0005);
}

TEST(BlockEigenvalues, Examples) {
  const auto e = eigenvalues_from_correlation(corr2(0.43));
  EXPECT_NEAR(e.eig1, 1.43, 1e-12);
  EXPECT_NEAR(e.eig2, 0.57, 1e-12);
  EXPECT_TRUE(e.unidimensional());
  const auto one = eigenvalues_from_correlation(Eigen::MatrixXd::Ones(1, 1));
  EXPECT_EQ(one.eig1, 1.0);
  EXPECT_EQ(one.eig2, 0.0);
  const auto id = eigenvalues_from_correlation(Eigen::MatrixXd::Identity(2, 2));
  EXPECT_NEAR(id.eig1, 1.0, 1e-12);
  EXPECT_NEAR(id.eig2, 1.0, 1e-12);
  EXPECT_FALSE(id.unidimensional());
}

TEST(BlockEigenvalues, TraceIdentityProperty) {
  std::mt19937_64 eng(21);
  std::normal_distribution<double> dist;
  for (int p = 2; p <= 6; ++p) {
    Eigen::MatrixXd x(40, p);
    for (Eigen::Index i = 0; i < 40; ++i)
      for (Eigen::Index j = 0; j < p; ++j) x(i, j) = dist(eng) + (j ? 0.5 * x(i, 0) : 0.0);
    const Eigen::MatrixXd r = stats::correlation_matrix(x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
    EXPECT_NEAR(es.eigenvalues().sum(), static_cast<double>(p), 1e-9);
    const auto e = block_eigenvalues(x);
    EXPECT_GE(e.eig1, e.eig2);
    EXPECT_GE(e.eig2, 0.0);
  }
}

TEST(CommunalityRedundancy, ReferenceRowsAndZero) {
  // identities per manifest; check the arithmetic of reference rows
  EXPECT_NEAR(0.930 * 0.930, 0.865, 0.0005);
  EXPECT_NEAR(0.865 * 0.752, 0.651, 0.002);
  const auto f = fit_synth(five_blocks(300, 1));
  const auto q = communality_redundancy(f.fit);
  for (const auto& m : q.manifests) {
    EXPECT_NEAR(m.communality, m.loading * m.loading, 1e-15);
    const auto b = f.fit.model.block_index(m.block);
    if (f.fit.model.is_endogenous(b)) {
      ASSERT_TRUE(m.redundancy.has_value());
      EXPECT_NEAR(*m.redundancy, m.communality * f.fit.r_squared[static_cast<Eigen::Index>(b)], 1e-15);
    } else {
      EXPECT_FALSE(m.redundancy.has_value());
    }
  }
  for (const auto& b : q.blocks) {
    EXPECT_EQ(b.ave, b.avg_communality);
    EXPECT_GE(b.ave, 0.0);
    EXPECT_LE(b.ave, 1.0);
  }
  // single indicator: loading 1 -> communality 1, redundancy = R²
  EXPECT_EQ(q.manifests[2].communality, 1.0);
  EXPECT_EQ(*q.manifests[2].redundancy, f.fit.r_squared[1]);
}

TEST(GoodnessOfFit, Examples) {
  const std::vector<double> comm{0.712, 0.985, 0.788, 0.916};
  const std::vector<double> r2{0.506, 0.704, 0.752, 0.758};
  EXPECT_NEAR(goodness_of_fit(comm, r2), 0.7604, 0.00005);
  EXPECT_NEAR(goodness_of_fit(std::vector<double>{1, 1}, std::vector<double>{1}), 1.0, 1e-15);
  EXPECT_NEAR(goodness_of_fit(std::vector<double>{0.64}, std::vector<double>{0.25}), 0.4, 1e-15);
}

TEST(GoodnessOfFit, InvariantToAddedSingleIndicatorExogenousBlock) {
  auto s = five_blocks(300, 2);
  const auto base = fit_synth(s);
  const double g0 = goodness_of_fit(communality_redundancy(base.fit));
  s.blocks.push_back({"Extra", {1.0}, {}, 0.0, {}});
  const auto more = fit_synth(s);
  // the extra exogenous single-manifest block changes neither average
  const double g1 = goodness_of_fit(communality_redundancy(more.fit));
  EXPECT_NEAR(g0, g1, 0.02);  // data differ only by the extra column's draws
  auto q = communality_redundancy(base.fit);
  q.blocks.push_back({"Extra", false, 1, 1.0, 1.0, std::nullopt, std::nullopt});
  EXPECT_EQ(goodness_of_fit(q), g0);
}

TEST(CrossLoadings, WellSeparatedBlocksPassDiscriminantValidity) {
  auto s = five_blocks(1000, 3);
  const auto f = fit_synth(s);
  const auto c = cross_loadings(f.fit, f.x);
  for (std::size_t k = 0; k < c.manifests.size(); ++k) {
    EXPECT_TRUE(c.discriminant[k]) << c.manifests[k];
    const auto kk = static_cast<Eigen::Index>(k);
    EXPECT_EQ(c.values(kk, static_cast<Eigen::Index>(c.own_block[k])), f.fit.loadings[kk]);
  }
  EXPECT_LE(c.values.cwiseAbs().maxCoeff(), 1.0 + 1e-12);
}

TEST(CrossLoadings, SingleBlockEqualsLoadings) {
  testkit::SynthSpec s;
  s.n = 100;
  s.seed = 4;
  s.blocks = {{"Only", {0.8, 0.7, 0.9}, {}, 0.0, {}}};
  const auto f = fit_synth(s);
  ASSERT_TRUE(f.fit.converged);
  const auto c = cross_loadings(f.fit, f.x);
  ASSERT_EQ(c.values.cols(), 1);
  EXPECT_EQ(c.values.col(0), f.fit.loadings);
}

TEST(CrossLoadings, MisassignedManifestFails) {
  // a copy of an HC manifest placed in the Socio block correlates more with HC
  auto s = five_blocks(1000, 5);
  auto syn = testkit::generate(s);
  auto m = syn.truth.model;
  syn.data.columns.push_back("HC_copy");
  Eigen::MatrixXd v(syn.data.rows(), syn.data.cols() + 1);
  v << syn.data.values, syn.data.values.col(syn.data.column_index("HC_1"));
  syn.data.values = v;
  m.blocks[0].manifest.push_back({"HC_copy", false});
  const Eigen::MatrixXd x = manifest_matrix(syn.data, m);
  const auto f = fit(x, m);
  const auto c = cross_loadings(f, x);
  const auto k = std::find(c.manifests.begin(), c.manifests.end(), "HC_copy") - c.manifests.begin();
  EXPECT_FALSE(c.discriminant[static_cast<std::size_t>(k)]);
}

namespace {

/// Population residual correlations of one generated block. Population
/// Mode A weights are proportional to the true loadings, so with R the
/// manifest correlation matrix the fitted loadings are l = R lambda /
/// sqrt(lambda' R lambda) and the residual covariance is R - l l'.
Eigen::MatrixXd population_residual_corr(const std::vector<double>& loadings, double noise_corr) {
  const auto p = static_cast<Eigen::Index>(loadings.size());
  Eigen::VectorXd lam(p);
  for (Eigen::Index k = 0; k < p; ++k) lam[k] = loadings[static_cast<std::size_t>(k)];
  const Eigen::VectorXd sd = (1.0 - lam.array().square()).sqrt();
  Eigen::MatrixXd r = lam * lam.transpose();
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b < p; ++b) r(a, b) += sd[a] * sd[b] * (a == b ? 1.0 : noise_corr);
  const Eigen::VectorXd l = r * lam / std::sqrt(lam.dot(r * lam));
  const Eigen::MatrixXd c = r - l * l.transpose();
  const Eigen::VectorXd d = c.diagonal().cwiseSqrt();
  return c.array() / (d * d.transpose()).array();
}

}  // namespace

TEST(ResidualOrthogonality, MatchesPopulationValueUnderIndependentNoise) {
  testkit::SynthSpec s;
  s.n = 2000;
  s.seed = 6;
  s.blocks = {{"A", {0.9, 0.75, 0.6}, {}, 0.0, {}}, {"B", {0.8, 0.8}, {}, 0.0, {}}};
  s.paths = {{"A", "B", 0.5}};
  const auto f = fit_synth(s);
  const auto r = residual_orthogonality(f.fit, f.x, "A");
  // residuals of a composite built from the same manifests are never
  // orthogonal: exchangeable blocks give exactly -1/(p-1)
  const auto pop = population_residual_corr(s.blocks[0].loadings, 0.0);
  for (Eigen::Index a = 0; a < 3; ++a)
    for (Eigen::Index b = a + 1; b < 3; ++b) EXPECT_NEAR(r.values(a, b), pop(a, b), 0.1) << a << "," << b;
  EXPECT_NEAR(population_residual_corr({0.8, 0.8, 0.8}, 0.0)(0, 1), -0.5, 1e-12);
  EXPECT_FALSE(r.degenerate);
}

TEST(ResidualOrthogonality, CorrelatedNoiseShiftsResiduals) {
  testkit::SynthSpec s;
  s.n = 20000;
  s.seed = 7;
  s.blocks = {{"A", {0.9, 0.5, 0.5}, {}, 0.5, {}}, {"B", {0.8, 0.8}, {}, 0.0, {}}};
  s.paths = {{"A", "B", 0.5}};
  const auto f = fit_synth(s);
  const auto r = residual_orthogonality(f.fit, f.x, "A");
  const auto pop = population_residual_corr(s.blocks[0].loadings, 0.5);
  const auto clean = population_residual_corr(s.blocks[0].loadings, 0.0);
  for (Eigen::Index a = 0; a < 3; ++a)
    for (Eigen::Index b = a + 1; b < 3; ++b) EXPECT_NEAR(r.values(a, b), pop(a, b), 0.05) << a << "," << b;
  // the weakest pair moves well away from its independent-noise value
  EXPECT_GT(std::abs(r.values(1, 2) - clean(1, 2)), 0.1);
}

TEST(ResidualOrthogonality, DuplicatedColumnsDegenerate) {
  std::mt19937_64 eng(8);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd x(50, 3);
  for (Eigen::Index i = 0; i < 50; ++i) {
    x(i, 0) = dist(eng);
    x(i, 1) = x(i, 0);
    x(i, 2) = 0.5 * x(i, 0) + dist(eng);
  }
  ModelSpec m;
  m.blocks = {{"A", {{"a1", false}, {"a2", false}}, Mode::A}, {"B", {{"b", false}}, Mode::A}};
  m.paths = {{"A", "B"}};
  const auto f = fit(x, m);
  const auto r = residual_orthogonality(f, stats::zscore(x), "A");
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.values(0, 1), 0.0);
  EXPECT_THROW(residual_orthogonality(f, x, "B"), InputError);
}

TEST(ThresholdScreen, AlphaFailRhoPassBlockAccepted) {
  AssessmentReport rep;
  UnidimReport u;
  u.block = "Socio-economic";
  u.mv_count = 2;
  u.cronbach_alpha = 0.598;
  u.dg_rho = 0.833;
  u.eig1 = 1.43;
  u.eig2 = 0.57;
  rep.unidim.push_back(u);
  const auto v = threshold_screen(rep);
  auto find = [&](const std::string& rule) {
    return *std::find_if(v.begin(), v.end(), [&](const Verdict& x) { return x.rule == rule; });
  };
  EXPECT_EQ(find("cronbach_alpha").status, Status::Fail);
  EXPECT_EQ(find("dg_rho").status, Status::Pass);
  EXPECT_EQ(find("eigenvalues").status, Status::Pass);
  EXPECT_EQ(find("unidimensionality").status, Status::Pass);
  EXPECT_FALSE(find("unidimensionality").note.empty());
  EXPECT_EQ(threshold_screen(rep).size(), v.size());
}

TEST(ThresholdScreen, LoadingRules) {
  auto verdict_for = [](double loading) {
    AssessmentReport rep;
    rep.quality.manifests.push_back({"SPR", "Educ", 0.5, loading, loading * loading, std::nullopt});
    return threshold_screen(rep).front();
  };
  EXPECT_EQ(verdict_for(0.844).status, Status::Pass);
  EXPECT_EQ(verdict_for(0.55).status, Status::Warn);
  EXPECT_EQ(verdict_for(0.35).status, Status::Fail);
}

TEST(ThresholdScreen, StructuralRules) {
  AssessmentReport rep;
  rep.quality.blocks.push_back({"HC", true, 2, 0.916, 0.916, 0.758, 0.694});
  rep.quality.blocks.push_back({"Weak", true, 2, 0.4, 0.4, 0.05, 0.02});
  rep.gof = 0.7604;
  std::map<std::string, Status> got;
  for (const auto& v : threshold_screen(rep)) got[v.rule + ":" + v.subject] = v.status;
  EXPECT_EQ(got["ave:HC"], Status::Pass);
  EXPECT_EQ(got["r_squared:HC"], Status::Pass);
  EXPECT_EQ(got["ave:Weak"], Status::Fail);
  EXPECT_EQ(got["r_squared:Weak"], Status::Fail);
  EXPECT_EQ(got["gof:model"], Status::Pass);
}

TEST(Unidimensionality, SingleIndicatorDegenerate) {
  const auto f = fit_synth(five_blocks(200, 9));
  const auto u = unidimensionality(f.fit, f.x);
  EXPECT_TRUE(u[1].degenerate);
  EXPECT_EQ(u[1].cronbach_alpha, 1.0);
  EXPECT_EQ(u[1].dg_rho, 1.0);
  EXPECT_EQ(u[1].eig1, 1.0);
  EXPECT_EQ(u[1].eig2, 0.0);
  for (const auto& r : u) {
    EXPECT_GE(r.dg_rho, 0.0);
    EXPECT_LE(r.dg_rho, 1.0);
  }
}
