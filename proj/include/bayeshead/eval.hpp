#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bayeshead/predict.hpp"

namespace bayeshead {

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  Index count = 0;
  double mean_confidence = 0.0;  // 0 for empty bins
  double accuracy = 0.0;         // 0 for empty bins
};

/// Equal-width confidence bins over [0,1]; the last bin is right-closed.
struct ReliabilityBins {
  std::vector<ReliabilityBin> bins;
  Index total = 0;
};

inline constexpr int kDefaultBins = 10;

ReliabilityBins reliability(const std::vector<double>& confidences, const std::vector<bool>& correct,
                            int n_bins = kDefaultBins);
ReliabilityBins reliability(const std::vector<PredictiveSummary>& summaries, const std::vector<int>& labels,
                            int n_bins = kDefaultBins);

/// sum_b (count_b / N) |accuracy_b - mean_confidence_b|.
double ece(const ReliabilityBins& bins);

struct CoveragePoint {
  double threshold = 0.0;
  double coverage = 0.0;
  Index answered = 0;
  double selective_accuracy = 0.0;  // NaN when nothing is answered
};

struct CoverageCurve {
  std::vector<CoveragePoint> points;  // thresholds ascending
};

/// Selective prediction over the given sorted thresholds in [0,1].
CoverageCurve accuracy_coverage(const std::vector<PredictiveSummary>& summaries, const std::vector<int>& labels,
                                const std::vector<double>& thresholds);
/// Exact step curve: thresholds are the sorted unique confidences.
CoverageCurve accuracy_coverage(const std::vector<PredictiveSummary>& summaries, const std::vector<int>& labels);

/// Selective accuracy at the highest threshold whose coverage is still >= `coverage`.
double selective_accuracy_at(const CoverageCurve& curve, double coverage);

struct EvaluationBlock {
  ReliabilityBins reliability;
  double ece = 0.0;
  CoverageCurve coverage;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
};

EvaluationBlock evaluate(const std::vector<PredictiveSummary>& summaries, const std::vector<int>& labels,
                         int n_bins = kDefaultBins);

/// Point-estimate (MAP) vs. Bayesian predictions on the same examples.
struct ComparisonReport {
  EvaluationBlock map;
  EvaluationBlock bayes;
  std::vector<double> confidence_delta;  // bayes - map, per example
};

ComparisonReport compare(const std::vector<PredictiveSummary>& map_summaries,
                         const std::vector<PredictiveSummary>& bayes_summaries, const std::vector<int>& labels,
                         int n_bins = kDefaultBins);

nlohmann::json to_json(const ReliabilityBins& bins);
nlohmann::json to_json(const CoverageCurve& curve);
nlohmann::json to_json(const EvaluationBlock& block);
nlohmann::json to_json(const ComparisonReport& report, const std::string& bayes_label = "laplace");

}  // namespace bayeshead
