#pragma once

#include <vector>

#include <Eigen/Dense>

#include "bayeshead/sampler.hpp"

namespace bayeshead {

struct ChainDiagnostics {
  double mean_accept = 0.0;
  Index divergences = 0;
  Eigen::VectorXd split_rhat;  // per coordinate
  Eigen::VectorXd ess;         // per coordinate, not clipped to the draw count
};

/// Split-Rhat of one scalar quantity; each chain is halved (the middle draw of
/// odd-length chains is dropped). Returns +inf when within-chain variance is
/// zero but between-chain variance is not, NaN when both are zero.
double split_rhat(const std::vector<Eigen::VectorXd>& chains);

/// Multi-chain effective sample size using Geyer's initial positive sequence
/// with the monotone adjustment. Antithetic chains can yield ESS > total draws.
double effective_sample_size(const std::vector<Eigen::VectorXd>& chains);

/// Per-coordinate diagnostics across chains of equal shape, each with S >= 4.
ChainDiagnostics diagnostics(const std::vector<SampleChain>& chains);
ChainDiagnostics diagnostics(const SampleChain& chain);

}  // namespace bayeshead
