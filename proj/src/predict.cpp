#include "bayeshead/predict.hpp"

#include <cmath>

#include "bayeshead/error.hpp"

namespace bayeshead {

PredictiveSummary posterior_predictive(const Architecture& arch, const Eigen::MatrixXd& draws,
                                       const ConstVectorRef& x) {
  const Index s = draws.rows();
  if (s < 1) throw Error("posterior predictive needs at least one draw");
  if (draws.cols() != arch.n_params()) throw Error("draws do not match " + arch.describe());
  const Index c = arch.n_classes();
  Eigen::MatrixXd probs(s, c);
  for (Index k = 0; k < s; ++k) {
    const Eigen::VectorXd theta = draws.row(k).transpose();
    probs.row(k) = softmax(forward(arch, theta, x)).transpose();
  }
  PredictiveSummary out;
  out.n_samples = s;
  out.mean_probs = probs.colwise().mean().transpose();
  out.std_probs = ((probs.rowwise() - out.mean_probs.transpose()).array().square().colwise().mean().sqrt())
                      .matrix()
                      .transpose();
  Index best = 0;
  for (Index j = 1; j < c; ++j) {
    if (out.mean_probs(j) > out.mean_probs(best)) best = j;
  }
  out.predicted = static_cast<int>(best);
  out.confidence = out.mean_probs(best);
  return out;
}

PredictiveSummary posterior_predictive(const Architecture& arch, const SampleChain& samples, const ConstVectorRef& x) {
  return posterior_predictive(arch, samples.draws, x);
}

PredictiveSummary point_predictive(const Architecture& arch, const ConstVectorRef& theta, const ConstVectorRef& x) {
  const Eigen::MatrixXd draws = theta.transpose();
  return posterior_predictive(arch, draws, x);
}

Decision decide(const PredictiveSummary& summary, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error("abstention threshold must lie in [0,1]");
  Decision d;
  d.threshold = threshold;
  d.abstain = summary.confidence < threshold;
  d.answer = d.abstain ? -1 : summary.predicted;
  return d;
}

std::vector<PredictiveSummary> batch_predict(const Architecture& arch, const Eigen::MatrixXd& draws,
                                             const Eigen::MatrixXd& features) {
  std::vector<PredictiveSummary> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  for (Index i = 0; i < features.rows(); ++i) {
    out.push_back(posterior_predictive(arch, draws, features.row(i).transpose()));
  }
  return out;
}

std::vector<PredictiveSummary> batch_predict(const Architecture& arch, const SampleChain& samples, const Dataset& ds) {
  return batch_predict(arch, samples.draws, ds.features);
}

}  // namespace bayeshead
