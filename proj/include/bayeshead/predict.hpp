#pragma once

#include <vector>

#include <Eigen/Dense>

#include "bayeshead/model.hpp"
#include "bayeshead/sampler.hpp"

namespace bayeshead {

/// Monte Carlo posterior predictive for one input.
struct PredictiveSummary {
  Eigen::VectorXd mean_probs;
  Eigen::VectorXd std_probs;  // population std over the S softmax vectors
  int predicted = 0;          // argmax of mean_probs, lowest index on ties
  double confidence = 0.0;    // max of mean_probs
  Index n_samples = 0;
};

struct Decision {
  bool abstain = false;
  int answer = -1;  // predicted class, -1 when abstaining
  double threshold = 0.0;
};

inline constexpr const char* kConfidenceDefinition = "max over classes of the posterior-mean predictive probability";

PredictiveSummary posterior_predictive(const Architecture& arch, const Eigen::MatrixXd& draws,
                                       const ConstVectorRef& x);
PredictiveSummary posterior_predictive(const Architecture& arch, const SampleChain& samples, const ConstVectorRef& x);

/// Plug-in summary from a single parameter vector (S = 1).
PredictiveSummary point_predictive(const Architecture& arch, const ConstVectorRef& theta, const ConstVectorRef& x);

/// Answer when confidence >= threshold, otherwise abstain. Threshold in [0,1].
Decision decide(const PredictiveSummary& summary, double threshold);

/// posterior_predictive for every row, in row order.
std::vector<PredictiveSummary> batch_predict(const Architecture& arch, const SampleChain& samples, const Dataset& ds);
std::vector<PredictiveSummary> batch_predict(const Architecture& arch, const Eigen::MatrixXd& draws,
                                             const Eigen::MatrixXd& features);

}  // namespace bayeshead
