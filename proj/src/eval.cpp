#include "bayeshead/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bayeshead/error.hpp"

namespace bayeshead {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw Error("length mismatch: " + std::to_string(a) + " predictions vs " + std::to_string(b) + " labels");
}

std::vector<bool> correctness(const std::vector<PredictiveSummary>& summaries, const std::vector<int>& labels) {
  check_lengths(summaries.size(), labels.size());
  std::vector<bool> out(summaries.size());
  for (std::size_t i = 0; i < summaries.size(); ++i) out[i] = summaries[i].predicted == labels[i];
  return out;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

ReliabilityBins reliability(const std::vector<double>& confidences, const std::vector<bool>& correct, int n_bins) {
  check_lengths(confidences.size(), correct.size());
  if (confidences.empty()) throw Error("reliability needs at least one prediction");
  if (n_bins < 1) throw Error("n_bins must be positive");
  ReliabilityBins out;
  out.total = static_cast<Index>(confidences.size());
  out.bins.resize(static_cast<std::size_t>(n_bins));
  std::vector<double> conf_sum(out.bins.size(), 0.0);
  std::vector<Index> hits(out.bins.size(), 0);
  for (int b = 0; b < n_bins; ++b) {
    out.bins[static_cast<std::size_t>(b)].lo = static_cast<double>(b) / n_bins;
    out.bins[static_cast<std::size_t>(b)].hi = static_cast<double>(b + 1) / n_bins;
  }
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) throw Error("confidence outside [0,1] at example " + std::to_string(i));
    auto b = static_cast<std::size_t>(std::floor(c * n_bins));
    b = std::min(b, out.bins.size() - 1);
    ++out.bins[b].count;
    conf_sum[b] += c;
    if (correct[i]) ++hits[b];
  }
  for (std::size_t b = 0; b < out.bins.size(); ++b) {
    auto& bin = out.bins[b];
    if (bin.count == 0) continue;
    bin.mean_confidence = conf_sum[b] / static_cast<double>(bin.count);
    bin.accuracy = static_cast<double>(hits[b]) / static_cast<double>(bin.count);
  }
  return out;
}

ReliabilityBins reliability(const std::vector<PredictiveSummary>& summaries, const std::vector<int>& labels,
                            int n_bins) {
  const auto correct = correctness(summaries, labels);
  std::vector<double> conf;
  conf.reserve(summaries.size());
  for (const auto& s : summaries) conf.push_back(s.confidence);
  return reliability(conf, correct, n_bins);
}

double ece(const ReliabilityBins& bins) {
  if (bins.total == 0) throw Error("ECE of an empty bin set");
  double acc = 0.0;
  for (const auto& bin : bins.bins) {
    if (bin.count == 0) continue;
    acc += static_cast<double>(bin.count) / static_cast<double>(bins.total) *
           std::abs(bin.accuracy - bin.mean_confidence);
  }
  return acc;
}

CoverageCurve accuracy_coverage(const std::vector<PredictiveSummary>& summaries, const std::vector<int>& labels,
                                const std::vector<double>& thresholds) {
  const auto correct = correctness(summaries, labels);
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw Error("thresholds must be sorted ascending");
  for (double t : thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error("thresholds must lie in [0,1]");
  }
  // Sort by confidence descending once; each threshold answers a prefix.
  std::vector<std::size_t> order(summaries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return summaries[a].confidence > summaries[b].confidence; });
  std::vector<Index> prefix_hits(order.size() + 1, 0);
  for (std::size_t k = 0; k < order.size(); ++k) prefix_hits[k + 1] = prefix_hits[k] + (correct[order[k]] ? 1 : 0);

  const double n = static_cast<double>(summaries.size());
  CoverageCurve curve;
  for (double t : thresholds) {
    // Number answered = count of confidence >= t.
    const auto it = std::partition_point(order.begin(), order.end(),
                                         [&](std::size_t i) { return summaries[i].confidence >= t; });
    const auto answered = static_cast<std::size_t>(it - order.begin());
    CoveragePoint p;
    p.threshold = t;
    p.answered = static_cast<Index>(answered);
    p.coverage = n > 0 ? static_cast<double>(answered) / n : 0.0;
    p.selective_accuracy = answered > 0 ? static_cast<double>(prefix_hits[answered]) / static_cast<double>(answered)
                                        : std::numeric_limits<double>::quiet_NaN();
    curve.points.push_back(p);
  }
  return curve;
}

CoverageCurve accuracy_coverage(const std::vector<PredictiveSummary>& summaries, const std::vector<int>& labels) {
  std::vector<double> grid;
  grid.reserve(summaries.size());
  for (const auto& s : summaries) grid.push_back(std::clamp(s.confidence, 0.0, 1.0));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return accuracy_coverage(summaries, labels, grid);
}

double selective_accuracy_at(const CoverageCurve& curve, double coverage) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : curve.points) {
    if (p.coverage >= coverage && p.answered > 0) best = p.selective_accuracy;
  }
  return best;
}

EvaluationBlock evaluate(const std::vector<PredictiveSummary>& summaries, const std::vector<int>& labels, int n_bins) {
  EvaluationBlock block;
  block.reliability = reliability(summaries, labels, n_bins);
  block.ece = ece(block.reliability);
  block.coverage = accuracy_coverage(summaries, labels);
  double hits = 0.0;
  double conf = 0.0;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    hits += summaries[i].predicted == labels[i] ? 1.0 : 0.0;
    conf += summaries[i].confidence;
  }
  block.accuracy = hits / static_cast<double>(summaries.size());
  block.mean_confidence = conf / static_cast<double>(summaries.size());
  return block;
}

ComparisonReport compare(const std::vector<PredictiveSummary>& map_summaries,
                         const std::vector<PredictiveSummary>& bayes_summaries, const std::vector<int>& labels,
                         int n_bins) {
  if (map_summaries.size() != bayes_summaries.size()) throw Error("MAP and Bayesian predictions are misaligned");
  check_lengths(map_summaries.size(), labels.size());
  ComparisonReport report;
  report.map = evaluate(map_summaries, labels, n_bins);
  report.bayes = evaluate(bayes_summaries, labels, n_bins);
  report.confidence_delta.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    report.confidence_delta.push_back(bayes_summaries[i].confidence - map_summaries[i].confidence);
  }
  return report;
}

nlohmann::json to_json(const ReliabilityBins& bins) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : bins.bins) {
    arr.push_back({{"lo", b.lo},
                   {"hi", b.hi},
                   {"count", b.count},
                   {"mean_confidence", b.mean_confidence},
                   {"accuracy", b.accuracy}});
  }
  return {{"n_bins", bins.bins.size()}, {"total", bins.total}, {"bins", arr}};
}

nlohmann::json to_json(const CoverageCurve& curve) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : curve.points) {
    arr.push_back({{"threshold", p.threshold},
                   {"coverage", p.coverage},
                   {"answered", p.answered},
                   {"selective_accuracy", number_or_null(p.selective_accuracy)}});
  }
  return arr;
}

nlohmann::json to_json(const EvaluationBlock& block) {
  return {{"accuracy", block.accuracy},
          {"mean_confidence", block.mean_confidence},
          {"ece", block.ece},
          {"reliability", to_json(block.reliability)},
          {"coverage", to_json(block.coverage)}};
}

nlohmann::json to_json(const ComparisonReport& report, const std::string& bayes_label) {
  return {{"map", to_json(report.map)},
          {bayes_label, to_json(report.bayes)},
          {"confidence_delta", report.confidence_delta}};
}

}  // namespace bayeshead
