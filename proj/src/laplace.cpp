#include "bayeshead/laplace.hpp"

#include <cmath>
#include <numeric>

#include "bayeshead/error.hpp"
#include "bayeshead/random.hpp"

namespace bayeshead {

namespace {

/// Adam ascent state.
class Adam {
 public:
  Adam(const OptimizerConfig& cfg, Index dim)
      : cfg_(cfg), m_(Eigen::VectorXd::Zero(dim)), v_(Eigen::VectorXd::Zero(dim)) {}

  void ascend(Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    theta.array() += cfg_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.epsilon);
  }

 private:
  const OptimizerConfig& cfg_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  Index t_ = 0;
};

void check_optimizer(const OptimizerConfig& cfg) {
  if (cfg.steps < 0) throw Error("optimizer steps must be non-negative");
  if (!(cfg.learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (cfg.batch_size < 0) throw Error("batch size must be non-negative");
}

}  // namespace

MapEstimate maximize(const Target& objective, const Eigen::VectorXd& init, const OptimizerConfig& config) {
  check_optimizer(config);
  Eigen::VectorXd theta = init;
  Eigen::VectorXd grad(theta.size());
  auto evaluate = [&](Index step) {
    try {
      return objective(theta, grad);
    } catch (const NumericError& e) {
      throw NumericError("non-finite objective at step " + std::to_string(step) + ": " + e.what());
    }
  };
  double value = evaluate(0);
  Adam adam(config, theta.size());
  MapEstimate out;
  out.stop = StopReason::budget_exhausted;
  Index step = 0;
  for (; step < config.steps; ++step) {
    if (!std::isfinite(value)) throw NumericError("objective became non-finite at step " + std::to_string(step));
    if (grad.norm() <= config.tolerance) {
      out.stop = StopReason::converged;
      break;
    }
    adam.ascend(theta, grad);
    value = evaluate(step + 1);
    out.trace.push_back(-value);
  }
  if (!std::isfinite(value)) throw NumericError("objective became non-finite at step " + std::to_string(step));
  if (out.stop != StopReason::converged && grad.norm() <= config.tolerance) out.stop = StopReason::converged;
  out.theta_map = {ParamLayout::flat(theta.size()), std::move(theta)};
  out.grad_norm = grad.norm();
  out.n_steps = step;
  return out;
}

MapEstimate train_map(const Architecture& arch, const Dataset& ds, const Prior& prior, const OptimizerConfig& config,
                      const Eigen::VectorXd& init) {
  check_optimizer(config);
  if (ds.size() == 0) throw DataError("MAP training requires a nonempty dataset");
  if (init.size() != arch.n_params()) throw Error("initial parameters do not match " + arch.describe());

  const Index n = ds.size();
  Index batch = config.batch_size;
  if (batch == 0) batch = n < 1024 ? n : 256;
  batch = std::min(batch, n);

  if (batch == n) {
    const Target objective(
        [&](const Eigen::VectorXd& q, Eigen::VectorXd& g) { return log_posterior_and_grad(arch, q, ds, prior, g); });
    MapEstimate out = maximize(objective, init, config);
    out.theta_map = arch.wrap(std::move(out.theta_map.values));
    return out;
  }

  Eigen::VectorXd theta = init;
  Adam adam(config, theta.size());
  Rng rng(config.seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const double scale = static_cast<double>(n) / static_cast<double>(batch);

  MapEstimate out;
  Eigen::VectorXd full_grad;
  double value = log_posterior_and_grad(arch, theta, ds, prior, full_grad);
  Index step = 0;
  while (step < config.steps) {
    if (full_grad.norm() <= config.tolerance) {
      out.stop = StopReason::converged;
      break;
    }
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<std::size_t>(rng.uniform_index(i + 1))]);
    }
    for (Index start = 0; start + batch <= n && step < config.steps; start += batch, ++step) {
      const std::vector<Index> rows(order.begin() + start, order.begin() + start + batch);
      Eigen::VectorXd grad = grad_log_prior(theta, prior);
      const double ll = log_likelihood_and_grad(arch, theta, ds, rows, scale, grad);
      if (!std::isfinite(ll)) throw NumericError("MAP training: non-finite loss at step " + std::to_string(step));
      adam.ascend(theta, grad);
    }
    value = log_posterior_and_grad(arch, theta, ds, prior, full_grad);
    if (!std::isfinite(value)) throw NumericError("MAP training: non-finite loss at step " + std::to_string(step));
    out.trace.push_back(-value);
  }
  if (out.stop != StopReason::converged && full_grad.norm() <= config.tolerance) out.stop = StopReason::converged;
  out.theta_map = arch.wrap(std::move(theta));
  out.grad_norm = full_grad.norm();
  out.n_steps = step;
  return out;
}

Eigen::VectorXd empirical_fisher_diag(const PerExampleGradient& grad_fn, Index n) {
  if (n < 1) throw DataError("empirical Fisher requires a nonempty dataset");
  Eigen::VectorXd acc;
  for (Index i = 0; i < n; ++i) {
    const Eigen::VectorXd g = grad_fn(i);
    if (!g.allFinite()) throw NumericError("non-finite per-example gradient at example " + std::to_string(i));
    if (i == 0) acc = Eigen::VectorXd::Zero(g.size());
    acc += g.cwiseAbs2();
  }
  return acc / static_cast<double>(n);
}

Eigen::VectorXd empirical_fisher_diag(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds) {
  return empirical_fisher_diag(
      [&](Index i) {
        try {
          return per_example_grad_loglik(arch, theta, ds.features.row(i).transpose(),
                                         ds.labels[static_cast<std::size_t>(i)]);
        } catch (const NumericError&) {
          throw NumericError("non-finite per-example gradient at example " + std::to_string(i));
        }
      },
      ds.size());
}

GaussianPosterior laplace_posterior(const ParamVector& theta_map, const Eigen::VectorXd& fisher_diag,
                                    const Prior& prior, Index n_data, double floor) {
  if (fisher_diag.size() != theta_map.values.size()) throw Error("Fisher diagonal does not match parameter count");
  if ((fisher_diag.array() < 0.0).any()) throw Error("Fisher diagonal entries must be non-negative");
  if (!(floor > 0.0)) throw Error("precision floor must be positive");
  if (!(prior.std_dev > 0.0)) throw Error("prior std must be positive");
  const double prior_precision = 1.0 / (prior.std_dev * prior.std_dev);
  const Eigen::ArrayXd precision = static_cast<double>(n_data) * fisher_diag.array() + prior_precision;
  return {theta_map, precision.max(floor).inverse().matrix()};
}

SampleChain sample_gaussian(const GaussianPosterior& posterior, Index n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw Error("sample_gaussian needs S >= 1");
  const Index p = posterior.mean.values.size();
  const Eigen::VectorXd scale = posterior.variance.cwiseSqrt();
  Rng rng(seed);
  SampleChain chain;
  chain.layout = posterior.mean.layout;
  chain.seed = seed;
  chain.draws.resize(n_samples, p);
  for (Index s = 0; s < n_samples; ++s) {
    for (Index j = 0; j < p; ++j) chain.draws(s, j) = posterior.mean.values(j) + scale(j) * rng.normal();
  }
  chain.accept_stats.assign(static_cast<std::size_t>(n_samples), 1.0);
  chain.tree_depths.assign(static_cast<std::size_t>(n_samples), 0);
  return chain;
}

}  // namespace bayeshead
