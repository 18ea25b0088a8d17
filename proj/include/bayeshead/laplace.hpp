#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bayeshead/model.hpp"
#include "bayeshead/sampler.hpp"

namespace bayeshead {

/// Adam settings for MAP training. batch_size 0 means full batch below 1024
/// rows and 256-row minibatches otherwise.
struct OptimizerConfig {
  double learning_rate = 1e-2;
  Index steps = 2000;
  Index batch_size = 0;
  double tolerance = 1e-6;  // on the full-data gradient norm
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

enum class StopReason { converged, budget_exhausted };

struct MapEstimate {
  ParamVector theta_map;
  double grad_norm = 0.0;
  Index n_steps = 0;
  std::vector<double> trace;  // negative log posterior after each epoch
  StopReason stop = StopReason::budget_exhausted;
};

/// Maximises a differentiable objective with full-batch Adam.
MapEstimate maximize(const Target& objective, const Eigen::VectorXd& init, const OptimizerConfig& config);

/// Ascends the model's log posterior from `init`; minibatch order is a seeded
/// shuffle per epoch.
MapEstimate train_map(const Architecture& arch, const Dataset& ds, const Prior& prior, const OptimizerConfig& config,
                      const Eigen::VectorXd& init);

/// F_jj = (1/N) sum_i g_ij^2 with g_i the per-example log-likelihood gradient.
Eigen::VectorXd empirical_fisher_diag(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds);

/// Same average for any per-example gradient function over rows 0..n-1.
using PerExampleGradient = std::function<Eigen::VectorXd(Index)>;
Eigen::VectorXd empirical_fisher_diag(const PerExampleGradient& grad_fn, Index n);

/// Diagonal Gaussian posterior N(mean, diag(variance)).
struct GaussianPosterior {
  ParamVector mean;
  Eigen::VectorXd variance;
};

/// Human-readable precision formula recorded in run metadata.
inline constexpr const char* kLaplacePrecisionFormula = "precision_j = N * F_jj + 1 / prior_std^2; variance_j = 1 / max(precision_j, floor)";

/// precision_j = N * F_jj + 1/sigma^2, variance_j = 1 / max(precision_j, floor).
GaussianPosterior laplace_posterior(const ParamVector& theta_map, const Eigen::VectorXd& fisher_diag,
                                    const Prior& prior, Index n_data, double floor = 1e-8);

inline constexpr Index kDefaultMonteCarloSamples = 30;

/// S independent draws mean + sqrt(variance) * z.
SampleChain sample_gaussian(const GaussianPosterior& posterior, Index n_samples, std::uint64_t seed);

}  // namespace bayeshead
