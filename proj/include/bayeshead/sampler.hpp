#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "bayeshead/model.hpp"
#include "bayeshead/random.hpp"

namespace bayeshead {

/// Unnormalised log density with its gradient.
class Target {
 public:
  using ValueAndGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;
  using Value = std::function<double(const Eigen::VectorXd&)>;
  using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  explicit Target(ValueAndGradient fn) : fn_(std::move(fn)) {}
  Target(Value value, Gradient gradient);

  double operator()(const Eigen::VectorXd& q, Eigen::VectorXd& grad) const { return fn_(q, grad); }

  /// Log posterior of `arch` on `ds`; the target keeps its own copy of the data.
  static Target posterior(const Architecture& arch, Dataset ds, Prior prior);

 private:
  ValueAndGradient fn_;
};

enum class SamplerKind { hmc_fixed, nuts };
enum class MassKind { identity, diagonal };

struct HmcConfig {
  Index n_warmup = 1000;
  Index n_samples = 1000;
  std::uint64_t seed = 0;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  SamplerKind algorithm = SamplerKind::nuts;
  MassKind mass = MassKind::diagonal;
  /// Leapfrog steps per trajectory for hmc_fixed.
  int n_leapfrog = 10;
  /// Initial step size; <= 0 selects one with the doubling/halving heuristic.
  double step_size = 0.0;
  /// hmc_fixed draws each trajectory's step size uniformly from
  /// step * [1 - jitter, 1 + jitter] after warmup.
  double step_jitter = 0.1;
  double max_delta_h = 1000.0;
  bool adapt_step_size = true;

  void validate() const;
};

/// S x P posterior draws plus per-draw sampler statistics.
struct SampleChain {
  ParamLayout layout;
  Eigen::MatrixXd draws;
  std::vector<double> accept_stats;
  std::vector<int> tree_depths;  // leapfrog count for hmc_fixed
  Index divergences = 0;
  double step_size_final = 0.0;
  Eigen::VectorXd inverse_mass;
  std::uint64_t seed = 0;

  Index n_draws() const { return draws.rows(); }
  Index n_params() const { return draws.cols(); }
  double mean_accept() const;
};

struct LeapfrogResult {
  Eigen::VectorXd position;
  Eigen::VectorXd momentum;
  bool divergent = false;  // a non-finite state was reached
};

/// L steps of half-kick / drift / half-kick with kinetic energy p' M^-1 p / 2.
/// `inverse_mass` empty means identity.
LeapfrogResult leapfrog(const Eigen::VectorXd& position, const Eigen::VectorXd& momentum, const Target& target,
                        double step_size, int n_steps, const Eigen::VectorXd& inverse_mass = {});

/// Static-trajectory HMC with Metropolis correction.
SampleChain hmc_sample(const Target& target, const Eigen::VectorXd& init, const HmcConfig& config);

/// No-U-Turn sampler with multinomial trajectory sampling.
SampleChain nuts_sample(const Target& target, const Eigen::VectorXd& init, const HmcConfig& config);

/// Dispatches on config.algorithm.
SampleChain sample(const Target& target, const Eigen::VectorXd& init, const HmcConfig& config);

/// N(0, scale^2) per coordinate from the given seed.
Eigen::VectorXd default_init(Index n_params, std::uint64_t seed, double scale = 0.1);

}  // namespace bayeshead
