#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bayeshead/error.hpp"
#include "bayeshead/eval.hpp"
#include "bayeshead/random.hpp"
#include "oracles.hpp"

using namespace bayeshead;

using oracle::calibrated;
using oracle::Instance;
using oracle::random_simplex;
using oracle::summary_from;

TEST_CASE("bins partition [0,1] with the last bin closed") {
  const ReliabilityBins b = reliability({0.0, 0.1, 0.95, 1.0, 0.55}, {true, false, true, true, false}, 10);
  REQUIRE(b.bins.size() == 10);
  CHECK(b.bins[0].count == 1);
  CHECK(b.bins[1].count == 1);
  CHECK(b.bins[5].count == 1);
  CHECK(b.bins[9].count == 2);
  CHECK(b.bins[9].mean_confidence == doctest::Approx(0.975));
  CHECK(b.bins[0].lo == 0.0);
  CHECK(b.bins[9].hi == 1.0);
  Index total = 0;
  for (const auto& bin : b.bins) total += bin.count;
  CHECK(total == 5);
  CHECK_THROWS_AS(reliability(std::vector<double>{1.2}, std::vector<bool>{true}, 10), Error);
  CHECK_THROWS_AS(reliability({0.5, 0.5}, {true}, 10), Error);
  CHECK_THROWS_AS(reliability(std::vector<double>{}, std::vector<bool>{}, 10), Error);
}

TEST_CASE("confidence 1 and all correct: single occupied bin, ECE 0") {
  const ReliabilityBins b = reliability({1.0, 1.0, 1.0}, {true, true, true});
  CHECK(b.bins[9].count == 3);
  CHECK(b.bins[9].accuracy == 1.0);
  CHECK(ece(b) == 0.0);
  CHECK(ece(reliability(std::vector<double>{1.0}, std::vector<bool>{true})) == 0.0);
}

TEST_CASE("maximal miscalibration gives ECE exactly 0.5") {
  std::vector<double> conf(1000, 1.0);
  std::vector<bool> correct(1000);
  for (std::size_t i = 0; i < correct.size(); ++i) correct[i] = i % 2 == 0;
  const ReliabilityBins b = reliability(conf, correct);
  CHECK(b.bins[9].accuracy == 0.5);
  CHECK(b.bins[9].mean_confidence == 1.0);
  CHECK(ece(b) == 0.5);
}

TEST_CASE("calibrated-by-construction predictions have small ECE") {
  Rng rng(1);
  const Instance inst = calibrated(10000, rng);
  const ReliabilityBins b = reliability(inst.summaries, inst.labels);
  CHECK(ece(b) < 0.02);
  for (const auto& bin : b.bins) {
    if (bin.count >= 200) CHECK(std::abs(bin.accuracy - bin.mean_confidence) < 0.05);
  }
}

TEST_CASE("ECE is invariant under permutation") {
  Rng rng(2);
  Instance inst = calibrated(500, rng);
  const double before = ece(reliability(inst.summaries, inst.labels));
  for (std::size_t i = inst.labels.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i + 1));
    std::swap(inst.summaries[i], inst.summaries[j]);
    std::swap(inst.labels[i], inst.labels[j]);
  }
  CHECK(ece(reliability(inst.summaries, inst.labels)) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("coverage curve hand example") {
  std::vector<PredictiveSummary> s;
  for (double c : {0.9, 0.6, 0.3}) {
    PredictiveSummary p;
    p.confidence = c;
    p.predicted = 0;
    s.push_back(p);
  }
  const std::vector<int> labels{0, 1, 0};
  const CoverageCurve curve = accuracy_coverage(s, labels, {0.0, 0.7, 0.95});
  CHECK(curve.points[0].coverage == 1.0);
  CHECK(curve.points[0].selective_accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(curve.points[1].coverage == doctest::Approx(1.0 / 3.0));
  CHECK(curve.points[1].selective_accuracy == 1.0);
  CHECK(curve.points[2].answered == 0);
  CHECK(std::isnan(curve.points[2].selective_accuracy));
  CHECK_THROWS_AS(accuracy_coverage(s, labels, {0.7, 0.1}), Error);
  CHECK_THROWS_AS(accuracy_coverage(s, labels, {1.5}), Error);

  const CoverageCurve exact = accuracy_coverage(s, labels);
  REQUIRE(exact.points.size() == 3);
  CHECK(exact.points[0].threshold == 0.3);
  CHECK(selective_accuracy_at(exact, 0.5) == doctest::Approx(0.5));
  CHECK(selective_accuracy_at(exact, 0.3) == 1.0);
}

TEST_CASE("coverage curve equals brute-force filtering on random instances") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const Index n = 1 + static_cast<Index>(rng.uniform_index(60));
    std::vector<PredictiveSummary> s;
    std::vector<int> labels;
    for (Index i = 0; i < n; ++i) {
      // Coarse confidences force ties.
      Eigen::VectorXd p = random_simplex(3, rng, 2.0);
      PredictiveSummary sum = summary_from(p);
      sum.confidence = std::round(sum.confidence * 20.0) / 20.0;
      s.push_back(sum);
      labels.push_back(static_cast<int>(rng.uniform_index(3)));
    }
    const CoverageCurve curve = accuracy_coverage(s, labels);
    double prev = 2.0;
    for (const auto& point : curve.points) {
      Index answered = 0, hits = 0;
      for (Index i = 0; i < n; ++i) {
        if (s[static_cast<std::size_t>(i)].confidence >= point.threshold) {
          ++answered;
          if (s[static_cast<std::size_t>(i)].predicted == labels[static_cast<std::size_t>(i)]) ++hits;
        }
      }
      REQUIRE(point.answered == answered);
      REQUIRE(point.coverage == static_cast<double>(answered) / static_cast<double>(n));
      REQUIRE(point.selective_accuracy == static_cast<double>(hits) / static_cast<double>(answered));
      REQUIRE(point.coverage <= prev);
      prev = point.coverage;
    }
    CHECK(curve.points.front().coverage == 1.0);
  }
}

TEST_CASE("compare: identity, collapse and a sharpened model") {
  Rng rng(4);
  const Instance inst = calibrated(3000, rng);
  const ComparisonReport same = compare(inst.summaries, inst.summaries, inst.labels);
  for (double d : same.confidence_delta) CHECK(d == 0.0);
  CHECK(same.map.ece == same.bayes.ece);

  // Temperature-sharpened copy is overconfident; the calibrated side wins.
  std::vector<PredictiveSummary> sharp;
  for (const auto& s : inst.summaries) {
    Eigen::VectorXd p = s.mean_probs.array().pow(3.0);
    sharp.push_back(summary_from(p / p.sum()));
  }
  const ComparisonReport r = compare(sharp, inst.summaries, inst.labels);
  CHECK(r.bayes.ece < r.map.ece);
  CHECK(r.bayes.mean_confidence < r.map.mean_confidence);

  const nlohmann::json j = to_json(r, "laplace");
  CHECK(j.contains("map"));
  CHECK(j.contains("laplace"));
  CHECK(j["map"]["reliability"]["bins"].size() == 10);
  CHECK_THROWS_AS(compare(sharp, {}, inst.labels), Error);
}
