#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "bayeshead/error.hpp"
#include "bayeshead/eval.hpp"
#include "bayeshead/report.hpp"
#include "helpers.hpp"

using namespace bayeshead;
using testing::TempDir;

namespace {

const std::filesystem::path kGolden = BAYESHEAD_GOLDEN_DIR;

SampleChain gaussian_chain(Index n, double rho, double sd, std::uint64_t seed) {
  Rng rng(seed);
  SampleChain c;
  c.layout = ParamLayout({{"W1", 1, 2, 0}, {"b2", 2, 1, 0}});
  c.draws.resize(n, 4);
  for (Index i = 0; i < n; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    c.draws(i, 0) = sd * z1;
    c.draws(i, 1) = sd * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2);
    c.draws(i, 2) = rng.normal();
    c.draws(i, 3) = 0.5 * c.draws(i, 2) + 0.1 * rng.normal();
  }
  return c;
}

/// Byte comparison against tests/golden; BAYESHEAD_UPDATE_GOLDEN=1 rewrites.
void check_golden(const std::filesystem::path& produced, const std::string& name) {
  const std::filesystem::path golden = kGolden / name;
  if (std::getenv("BAYESHEAD_UPDATE_GOLDEN")) {
    std::filesystem::copy_file(produced, golden, std::filesystem::copy_options::overwrite_existing);
  }
  REQUIRE(std::filesystem::exists(golden));
  CHECK(testing::slurp(produced) == testing::slurp(golden));
}

std::vector<PredictiveSummary> fixed_summaries() {
  std::vector<PredictiveSummary> out;
  const double conf[] = {0.95, 0.9, 0.8, 0.72, 0.66, 0.55, 0.51, 0.45, 0.4, 0.36};
  for (int i = 0; i < 10; ++i) {
    PredictiveSummary s;
    s.confidence = conf[i];
    s.predicted = i % 3;
    s.mean_probs = Eigen::Vector3d::Constant((1.0 - conf[i]) / 2.0);
    s.mean_probs(i % 3) = conf[i];
    s.std_probs = Eigen::Vector3d::Constant(0.05);
    out.push_back(s);
  }
  return out;
}

const std::vector<int> kFixedLabels{0, 1, 2, 0, 0, 2, 0, 1, 1, 0};

}  // namespace

TEST_CASE("prior density integrates to 1 over +/- 6 sigma") {
  for (double sd : {0.3, 1.0, 2.5}) {
    const int n = 20000;
    const double lo = -6.0 * sd, h = 12.0 * sd / n;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) sum += (k == 0 || k == n ? 0.5 : 1.0) * prior_density(lo + k * h, sd);
    CHECK(sum * h == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("marginal_1d of prior draws matches the prior curve") {
  Rng rng(1);
  SampleChain c;
  c.layout = ParamLayout({{"W1", 1, 1, 0}});
  c.draws.resize(20000, 1);
  for (Index i = 0; i < c.draws.rows(); ++i) c.draws(i, 0) = rng.normal();
  const Marginal1D m = marginal_1d(c, "W1[0,0]", Prior{1.0});
  REQUIRE(m.edges.size() == 41);
  REQUIRE(m.density.size() == 40);
  double mass = 0.0, gap = 0.0;
  for (std::size_t b = 0; b < m.density.size(); ++b) {
    const double width = m.edges[b + 1] - m.edges[b];
    mass += m.density[b] * width;
    const double mid = 0.5 * (m.edges[b] + m.edges[b + 1]);
    gap = std::max(gap, std::abs(m.density[b] - prior_density(mid, 1.0)));
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gap < 0.1);
  CHECK(m.curve_x.front() <= -4.0);
  CHECK(m.curve_x.back() >= 4.0);
}

TEST_CASE("unknown parameter names are rejected with the valid list") {
  const SampleChain c = gaussian_chain(100, 0.0, 1.0, 2);
  try {
    marginal_1d(c, "W9[0,0]", Prior{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("W1, b2") != std::string::npos);
  }
  CHECK_THROWS_AS(marginal_2d(c, "W1[0,0]", "W9[0,0]"), Error);
  CHECK_THROWS_AS(marginal_2d(c, "W1[0,0]", "W1[0,0]"), Error);
}

TEST_CASE("2-D credible regions of an independent Gaussian") {
  const SampleChain c = gaussian_chain(20000, 0.0, 1.0, 3);
  const Histogram2D h = marginal_2d(c, "W1[0,0]", "W1[0,1]");
  CHECK(h.counts.rows() == 60);
  CHECK(h.counts.cols() == 60);
  CHECK(h.counts.sum() == 20000.0);
  CHECK(h.enclosed_mass[0] >= 0.63);
  CHECK(h.enclosed_mass[0] <= 0.73);
  for (int l = 0; l < 3; ++l) CHECK(h.enclosed_mass[static_cast<std::size_t>(l)] >= kCredibleMasses[static_cast<std::size_t>(l)]);
  CHECK(h.enclosed_mass[0] <= h.enclosed_mass[1]);
  CHECK(h.enclosed_mass[1] <= h.enclosed_mass[2]);
  CHECK(h.density_thresholds[0] >= h.density_thresholds[1]);
  // Padded box: the extreme samples sit strictly inside.
  CHECK(h.x_edges.front() < c.draws.col(0).minCoeff());
  CHECK(h.inside(0, 0.0, 0.0));
  CHECK_FALSE(h.inside(2, 100.0, 100.0));
  CHECK(h.locate(100.0, 0.0).first == -1);
}

TEST_CASE("2-D credible region tilts with the correlation sign") {
  for (double rho : {0.9, -0.9}) {
    const SampleChain c = gaussian_chain(20000, rho, 1.0, 4);
    const Histogram2D h = marginal_2d(c, "W1[0,0]", "W1[0,1]");
    double sxy = 0.0, sx = 0.0, sy = 0.0;
    Index n = 0;
    for (Index i = 0; i < c.draws.rows(); ++i) {
      if (!h.inside(0, c.draws(i, 0), c.draws(i, 1))) continue;
      sx += c.draws(i, 0);
      sy += c.draws(i, 1);
      sxy += c.draws(i, 0) * c.draws(i, 1);
      ++n;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    CHECK((cov > 0) == (rho > 0));
    CHECK(h.correlation == doctest::Approx(rho).epsilon(0.02));
  }
}

TEST_CASE("pair selection picks the extreme correlations") {
  const SampleChain c = gaussian_chain(5000, 0.0, 1.0, 5);
  const PairSelection sel = select_pairs(c, {{"W1[0,0]", "W1[0,1]"}, {"b2[0]", "b2[1]"}, {"W1[0,0]", "b2[0]"}});
  CHECK(sel.correlated == std::pair<std::string, std::string>{"b2[0]", "b2[1]"});
  CHECK(sel.correlated_corr > 0.9);
  CHECK(std::abs(sel.independent_corr) < 0.05);
  CHECK_THROWS_AS(select_pairs(c, {}), Error);
}

TEST_CASE("golden SVGs are byte-stable") {
  TempDir tmp("golden");
  const SampleChain c = gaussian_chain(400, 0.6, 0.8, 6);
  render_marginal_1d(marginal_1d(c, "W1[0,1]", Prior{1.0}), tmp / "marginal.svg");
  render_marginal_2d(marginal_2d(c, "W1[0,0]", "W1[0,1]"), tmp / "pair.svg");
  const auto summaries = fixed_summaries();
  render_predictive(summaries[0], 0, "entry 0", tmp / "entry.svg");
  const EvaluationBlock block = evaluate(summaries, kFixedLabels);
  render_reliability({{"map", block.reliability}}, tmp / "reliability.svg");
  render_coverage({{"map", block.coverage}}, tmp / "coverage.svg");
  for (const char* name : {"marginal", "pair", "entry", "reliability", "coverage"}) {
    check_golden(tmp / (std::string(name) + ".svg"), std::string(name) + ".svg");
    check_golden(tmp / (std::string(name) + ".csv"), std::string(name) + ".csv");
    CHECK(std::filesystem::file_size(tmp / (std::string(name) + ".svg")) <= 2u * 1024u * 1024u);
  }
  // Re-rendering is byte-identical.
  render_marginal_2d(marginal_2d(c, "W1[0,0]", "W1[0,1]"), tmp / "pair2.svg");
  CHECK(testing::slurp(tmp / "pair.svg") == testing::slurp(tmp / "pair2.svg"));
}

TEST_CASE("predictive bars mark predicted class and truth distinctly") {
  TempDir tmp("bars");
  auto s = fixed_summaries()[1];
  render_predictive(s, 2, "entry", tmp / "e.svg");
  const std::string svg = testing::slurp(tmp / "e.svg");
  CHECK(svg.find("id=\"pred\"") != std::string::npos);
  CHECK(svg.find("id=\"truth\"") != std::string::npos);
  render_predictive(s, -1, "entry", tmp / "f.svg");
  CHECK(testing::slurp(tmp / "f.svg").find("id=\"truth\"") == std::string::npos);
  const std::string csv = testing::slurp(tmp / "e.csv");
  CHECK(csv.rfind("class,mean,std,predicted,truth", 0) == 0);
}

TEST_CASE("2-D plot records the contour method and levels") {
  TempDir tmp("contour");
  const SampleChain c = gaussian_chain(2000, 0.5, 1.0, 7);
  render_marginal_2d(marginal_2d(c, "W1[0,0]", "W1[0,1]"), tmp / "p.svg");
  const std::string svg = testing::slurp(tmp / "p.svg");
  CHECK(svg.find("histogram highest-density") != std::string::npos);
  for (const char* id : {"contour-0", "contour-1", "contour-2"}) CHECK(svg.find(id) != std::string::npos);
}

TEST_CASE("empty coverage curve is an error, not an empty plot") {
  TempDir tmp("empty");
  CHECK_THROWS_AS(render_coverage({{"map", CoverageCurve{}}}, tmp / "c.svg"), Error);
  CHECK_FALSE(std::filesystem::exists(tmp / "c.svg"));
  CHECK_THROWS(render_reliability({{"x", ReliabilityBins{}}}, tmp / "nodir" / "r.svg"));
}
