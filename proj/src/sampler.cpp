#include "bayeshead/sampler.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "bayeshead/error.hpp"

namespace bayeshead {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct PhasePoint {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  Eigen::VectorXd grad;
  double log_density = 0.0;
};

/// Shared Hamiltonian machinery for both samplers.
class Dynamics {
 public:
  Dynamics(const Target& target, Index dim) : target_(target), inverse_mass_(Eigen::VectorXd::Ones(dim)) {}

  void evaluate(PhasePoint& z) const {
    double lp = kNegInf;
    try {
      lp = target_(z.q, z.grad);
    } catch (const NumericError&) {
      lp = kNegInf;
    }
    if (!std::isfinite(lp) || !z.grad.allFinite()) lp = kNegInf;
    z.log_density = lp;
  }

  double hamiltonian(const PhasePoint& z) const {
    const double kinetic = 0.5 * z.p.dot(inverse_mass_.cwiseProduct(z.p));
    const double h = -z.log_density + kinetic;
    return std::isnan(h) ? std::numeric_limits<double>::infinity() : h;
  }

  Eigen::VectorXd velocity(const Eigen::VectorXd& p) const { return inverse_mass_.cwiseProduct(p); }

  /// One leapfrog step of size `eps`; stops early on a non-finite density.
  void evolve(PhasePoint& z, double eps) const {
    z.p += 0.5 * eps * z.grad;
    z.q += eps * velocity(z.p);
    evaluate(z);
    if (z.log_density == kNegInf) return;
    z.p += 0.5 * eps * z.grad;
  }

  void sample_momentum(PhasePoint& z, Rng& rng) const {
    for (Index i = 0; i < z.p.size(); ++i) z.p(i) = rng.normal() / std::sqrt(inverse_mass_(i));
  }

  const Eigen::VectorXd& inverse_mass() const { return inverse_mass_; }
  void set_inverse_mass(Eigen::VectorXd m) { inverse_mass_ = std::move(m); }

 private:
  const Target& target_;
  Eigen::VectorXd inverse_mass_;
};

/// Nesterov dual averaging of log step size toward a target acceptance rate.
class DualAveraging {
 public:
  explicit DualAveraging(double target) : target_(target) {}

  void restart(double step_size) {
    mu_ = std::log(10.0 * step_size);
    h_bar_ = 0.0;
    log_eps_bar_ = 0.0;
    count_ = 0;
  }

  double learn(double accept_stat) {
    ++count_;
    const double t = static_cast<double>(count_);
    const double eta = 1.0 / (t + kT0);
    h_bar_ = (1.0 - eta) * h_bar_ + eta * (target_ - accept_stat);
    const double log_eps = mu_ - std::sqrt(t) / kGamma * h_bar_;
    const double weight = std::pow(t, -kKappa);
    log_eps_bar_ = weight * log_eps + (1.0 - weight) * log_eps_bar_;
    return std::exp(log_eps);
  }

  double final_step_size() const { return std::exp(log_eps_bar_); }

 private:
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;

  double target_;
  double mu_ = 0.0;
  double h_bar_ = 0.0;
  double log_eps_bar_ = 0.0;
  Index count_ = 0;
};

/// Windowed warmup: a fast initial buffer, doubling slow windows that estimate
/// the diagonal metric, and a fast terminal buffer.
class WarmupSchedule {
 public:
  WarmupSchedule(Index n_warmup, bool adapt_metric) : n_warmup_(n_warmup) {
    if (!adapt_metric || n_warmup < 20) {
      enabled_ = false;
      return;
    }
    if (init_buffer_ + term_buffer_ + window_size_ > n_warmup) {
      init_buffer_ = static_cast<Index>(0.15 * static_cast<double>(n_warmup));
      term_buffer_ = static_cast<Index>(0.1 * static_cast<double>(n_warmup));
      window_size_ = n_warmup - (init_buffer_ + term_buffer_);
    }
    next_window_ = init_buffer_ + window_size_ - 1;
  }

  /// Records the post-transition position; returns true when a window closes
  /// and `inverse_mass` was refreshed.
  bool observe(const Eigen::VectorXd& q, Eigen::VectorXd& inverse_mass) {
    if (!enabled_) return false;
    const bool in_window = counter_ >= init_buffer_ && counter_ < n_warmup_ - term_buffer_ && counter_ != n_warmup_;
    if (in_window) add(q);
    const bool end_window = counter_ == next_window_ && counter_ != n_warmup_;
    ++counter_;
    if (!end_window) return false;
    compute_next_window();
    const double n = static_cast<double>(n_seen_);
    Eigen::VectorXd var = m2_ / (n - 1.0);
    // Regularise toward unit scale.
    inverse_mass = (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
    n_seen_ = 0;
    return true;
  }

 private:
  void add(const Eigen::VectorXd& q) {
    if (n_seen_ == 0) {
      mean_ = Eigen::VectorXd::Zero(q.size());
      m2_ = Eigen::VectorXd::Zero(q.size());
    }
    ++n_seen_;
    const Eigen::VectorXd delta = q - mean_;
    mean_ += delta / static_cast<double>(n_seen_);
    m2_ += delta.cwiseProduct(q - mean_);
  }

  void compute_next_window() {
    if (next_window_ == n_warmup_ - term_buffer_ - 1) return;
    window_size_ *= 2;
    next_window_ = (counter_ - 1) + window_size_;
    if (next_window_ != n_warmup_ - term_buffer_ - 1) {
      if (next_window_ + 2 * window_size_ >= n_warmup_ - term_buffer_) next_window_ = n_warmup_ - term_buffer_ - 1;
    }
  }

  bool enabled_ = true;
  Index n_warmup_;
  Index init_buffer_ = 75;
  Index term_buffer_ = 50;
  Index window_size_ = 25;
  Index next_window_ = 0;
  Index counter_ = 0;
  Index n_seen_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

/// Doubles or halves `eps` until a single leapfrog step crosses acceptance 0.8.
double initial_step_size(const Dynamics& dyn, const PhasePoint& start, double eps, Rng& rng) {
  const double threshold = std::log(0.8);
  PhasePoint z = start;
  dyn.sample_momentum(z, rng);
  double h0 = dyn.hamiltonian(z);
  dyn.evolve(z, eps);
  double delta = h0 - dyn.hamiltonian(z);
  const int direction = delta > threshold ? 1 : -1;
  for (int iter = 0; iter < 200; ++iter) {
    z = start;
    dyn.sample_momentum(z, rng);
    h0 = dyn.hamiltonian(z);
    dyn.evolve(z, eps);
    delta = h0 - dyn.hamiltonian(z);
    if (direction == 1 && !(delta > threshold)) break;
    if (direction == -1 && !(delta < threshold)) break;
    eps = direction == 1 ? 2.0 * eps : 0.5 * eps;
    if (eps > 1e7) throw Error("step size heuristic diverged; the target may be improper");
    if (eps == 0.0) throw Error("step size heuristic collapsed to zero; check the target's gradient");
  }
  return eps;
}

struct TransitionResult {
  double accept_stat = 0.0;
  bool divergent = false;
  int depth = 0;
};

class StaticHmc {
 public:
  StaticHmc(const Dynamics& dyn, const HmcConfig& cfg) : dyn_(dyn), cfg_(cfg) {}

  TransitionResult transition(PhasePoint& z, double eps, Rng& rng) const {
    const double jitter = cfg_.step_jitter;
    const double step = jitter > 0.0 ? eps * (1.0 + jitter * (2.0 * rng.uniform() - 1.0)) : eps;
    dyn_.sample_momentum(z, rng);
    const double h0 = dyn_.hamiltonian(z);
    PhasePoint proposal = z;
    for (int l = 0; l < cfg_.n_leapfrog && proposal.log_density != kNegInf; ++l) dyn_.evolve(proposal, step);
    const double h1 = dyn_.hamiltonian(proposal);
    TransitionResult result;
    result.depth = cfg_.n_leapfrog;
    if (!std::isfinite(h1) || h1 - h0 > cfg_.max_delta_h) {
      result.divergent = true;
      result.accept_stat = 0.0;
      rng.uniform();
      return result;
    }
    result.accept_stat = std::min(1.0, std::exp(h0 - h1));
    if (rng.uniform() < result.accept_stat) z = std::move(proposal);
    return result;
  }

 private:
  const Dynamics& dyn_;
  const HmcConfig& cfg_;
};

/// Multinomial NUTS with the generalised no-U-turn criterion, including the
/// extra checks across merged subtrees.
class Nuts {
 public:
  Nuts(const Dynamics& dyn, const HmcConfig& cfg) : dyn_(dyn), cfg_(cfg) {}

  TransitionResult transition(PhasePoint& start, double eps, Rng& rng) {
    eps_ = eps;
    dyn_.sample_momentum(start, rng);
    h0_ = dyn_.hamiltonian(start);
    n_leapfrog_ = 0;
    sum_metro_prob_ = 0.0;
    divergent_ = false;

    PhasePoint z_fwd = start;
    PhasePoint z_bck = start;
    PhasePoint z_sample = start;
    PhasePoint z_propose = start;

    Eigen::VectorXd p_fwd_fwd = start.p, p_fwd_bck = start.p;
    Eigen::VectorXd p_bck_fwd = start.p, p_bck_bck = start.p;
    Eigen::VectorXd p_sharp_fwd_fwd = dyn_.velocity(start.p), p_sharp_fwd_bck = p_sharp_fwd_fwd;
    Eigen::VectorXd p_sharp_bck_fwd = p_sharp_fwd_fwd, p_sharp_bck_bck = p_sharp_fwd_fwd;
    Eigen::VectorXd rho = start.p;
    double log_sum_weight = 0.0;
    int depth = 0;

    while (depth < cfg_.max_tree_depth) {
      Eigen::VectorXd rho_fwd = Eigen::VectorXd::Zero(rho.size());
      Eigen::VectorXd rho_bck = Eigen::VectorXd::Zero(rho.size());
      bool valid = false;
      double log_sum_weight_subtree = kNegInf;

      if (rng.uniform() > 0.5) {
        rho_bck = rho;
        p_bck_fwd = p_fwd_bck;
        p_sharp_bck_fwd = p_sharp_fwd_bck;
        valid = build_tree(depth, z_fwd, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd, p_fwd_bck, p_fwd_fwd,
                           1.0, log_sum_weight_subtree, rng);
      } else {
        rho_fwd = rho;
        p_fwd_bck = p_bck_fwd;
        p_sharp_fwd_bck = p_sharp_bck_fwd;
        valid = build_tree(depth, z_bck, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck, p_bck_fwd, p_bck_bck,
                           -1.0, log_sum_weight_subtree, rng);
      }
      if (!valid) break;
      ++depth;

      if (log_sum_weight_subtree > log_sum_weight) {
        z_sample = z_propose;
      } else if (rng.uniform() < std::exp(log_sum_weight_subtree - log_sum_weight)) {
        z_sample = z_propose;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

      rho = rho_bck + rho_fwd;
      bool persist = no_u_turn(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
      persist = persist && no_u_turn(p_sharp_bck_bck, p_sharp_fwd_bck, rho_bck + p_fwd_bck);
      persist = persist && no_u_turn(p_sharp_bck_fwd, p_sharp_fwd_fwd, rho_fwd + p_bck_fwd);
      if (!persist) break;
    }

    TransitionResult result;
    result.depth = depth;
    result.divergent = divergent_;
    result.accept_stat = n_leapfrog_ > 0 ? sum_metro_prob_ / static_cast<double>(n_leapfrog_) : 0.0;
    start = std::move(z_sample);
    return result;
  }

 private:
  static bool no_u_turn(const Eigen::VectorXd& p_sharp_minus, const Eigen::VectorXd& p_sharp_plus,
                        const Eigen::VectorXd& rho) {
    return p_sharp_plus.dot(rho) > 0.0 && p_sharp_minus.dot(rho) > 0.0;
  }

  bool build_tree(int depth, PhasePoint& z, PhasePoint& z_propose, Eigen::VectorXd& p_sharp_beg,
                  Eigen::VectorXd& p_sharp_end, Eigen::VectorXd& rho, Eigen::VectorXd& p_beg, Eigen::VectorXd& p_end,
                  double sign, double& log_sum_weight, Rng& rng) {
    if (depth == 0) {
      dyn_.evolve(z, sign * eps_);
      ++n_leapfrog_;
      double h = z.log_density == kNegInf ? std::numeric_limits<double>::infinity() : dyn_.hamiltonian(z);
      if (h - h0_ > cfg_.max_delta_h) divergent_ = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0_ - h);
      sum_metro_prob_ += h0_ - h > 0.0 ? 1.0 : std::exp(h0_ - h);
      z_propose = z;
      p_sharp_beg = dyn_.velocity(z.p);
      p_sharp_end = p_sharp_beg;
      rho += z.p;
      p_beg = z.p;
      p_end = p_beg;
      return !divergent_;
    }

    const Index dim = rho.size();
    Eigen::VectorXd p_sharp_end_left(dim), p_end_left(dim);
    Eigen::VectorXd rho_left = Eigen::VectorXd::Zero(dim);
    double log_sum_weight_left = kNegInf;
    if (!build_tree(depth - 1, z, z_propose, p_sharp_beg, p_sharp_end_left, rho_left, p_beg, p_end_left, sign,
                    log_sum_weight_left, rng)) {
      return false;
    }

    PhasePoint z_propose_right = z;
    Eigen::VectorXd p_sharp_beg_right(dim), p_beg_right(dim);
    Eigen::VectorXd rho_right = Eigen::VectorXd::Zero(dim);
    double log_sum_weight_right = kNegInf;
    if (!build_tree(depth - 1, z, z_propose_right, p_sharp_beg_right, p_sharp_end, rho_right, p_beg_right, p_end,
                    sign, log_sum_weight_right, rng)) {
      return false;
    }

    const double log_sum_weight_subtree = log_sum_exp(log_sum_weight_left, log_sum_weight_right);
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);
    if (log_sum_weight_right > log_sum_weight_subtree) {
      z_propose = z_propose_right;
    } else if (rng.uniform() < std::exp(log_sum_weight_right - log_sum_weight_subtree)) {
      z_propose = z_propose_right;
    }

    const Eigen::VectorXd rho_subtree = rho_left + rho_right;
    rho += rho_subtree;
    bool persist = no_u_turn(p_sharp_beg, p_sharp_end, rho_subtree);
    persist = persist && no_u_turn(p_sharp_beg, p_sharp_beg_right, rho_left + p_beg_right);
    persist = persist && no_u_turn(p_sharp_end_left, p_sharp_end, rho_right + p_end_left);
    return persist;
  }

  const Dynamics& dyn_;
  const HmcConfig& cfg_;
  double eps_ = 0.0;
  double h0_ = 0.0;
  Index n_leapfrog_ = 0;
  double sum_metro_prob_ = 0.0;
  bool divergent_ = false;
};

template <typename Kernel>
SampleChain run_chain(const Target& target, const Eigen::VectorXd& init, const HmcConfig& config) {
  config.validate();
  const Index dim = init.size();
  if (dim < 1) throw Error("sampler needs at least one parameter");

  Dynamics dyn(target, dim);
  Rng rng(config.seed);
  PhasePoint z{init, Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim), 0.0};
  dyn.evaluate(z);
  if (z.log_density == kNegInf) throw NumericError("initial point has a non-finite log density or gradient");

  Kernel kernel(dyn, config);
  const bool adapt = config.adapt_step_size && config.n_warmup > 0;
  double eps = config.step_size > 0.0 ? config.step_size : 1.0;
  if (adapt || config.step_size <= 0.0) eps = initial_step_size(dyn, z, eps, rng);

  DualAveraging averaging(config.target_accept);
  averaging.restart(eps);
  WarmupSchedule schedule(config.n_warmup, config.mass == MassKind::diagonal);

  Index warmup_divergences = 0;
  for (Index it = 0; it < config.n_warmup; ++it) {
    const TransitionResult r = kernel.transition(z, eps, rng);
    if (r.divergent) ++warmup_divergences;
    if (adapt) eps = averaging.learn(r.accept_stat);
    Eigen::VectorXd inverse_mass = dyn.inverse_mass();
    if (schedule.observe(z.q, inverse_mass)) {
      dyn.set_inverse_mass(std::move(inverse_mass));
      if (adapt) {
        eps = initial_step_size(dyn, z, eps, rng);
        averaging.restart(eps);
      }
    }
  }
  if (config.n_warmup > 0 && warmup_divergences == config.n_warmup) {
    throw NumericError("every warmup transition diverged; try a smaller initial step size");
  }
  if (adapt) eps = averaging.final_step_size();

  SampleChain chain;
  chain.layout = ParamLayout::flat(dim);
  chain.seed = config.seed;
  chain.draws.resize(config.n_samples, dim);
  chain.accept_stats.reserve(static_cast<std::size_t>(config.n_samples));
  chain.tree_depths.reserve(static_cast<std::size_t>(config.n_samples));
  for (Index s = 0; s < config.n_samples; ++s) {
    const TransitionResult r = kernel.transition(z, eps, rng);
    chain.draws.row(s) = z.q.transpose();
    chain.accept_stats.push_back(r.accept_stat);
    chain.tree_depths.push_back(r.depth);
    if (r.divergent) ++chain.divergences;
  }
  chain.step_size_final = eps;
  chain.inverse_mass = dyn.inverse_mass();
  return chain;
}

}  // namespace

Target::Target(Value value, Gradient gradient)
    : fn_([value = std::move(value), gradient = std::move(gradient)](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
        g = gradient(q);
        return value(q);
      }) {}

Target Target::posterior(const Architecture& arch, Dataset ds, Prior prior) {
  return Target([arch, ds = std::move(ds), prior](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
    return log_posterior_and_grad(arch, q, ds, prior, g);
  });
}

void HmcConfig::validate() const {
  if (n_samples < 1) throw Error("n_samples must be at least 1");
  if (n_warmup < 0) throw Error("n_warmup must be non-negative");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw Error("target_accept must lie in (0,1)");
  if (algorithm == SamplerKind::nuts && max_tree_depth < 1) {
    throw Error("max_tree_depth must be at least 1 (depth 0 allows no trajectory)");
  }
  if (algorithm == SamplerKind::hmc_fixed && n_leapfrog < 1) throw Error("n_leapfrog must be at least 1");
  if (step_jitter < 0.0 || step_jitter >= 1.0) throw Error("step_jitter must lie in [0,1)");
  if (!adapt_step_size && step_size <= 0.0) throw Error("a fixed step size must be positive");
}

double SampleChain::mean_accept() const {
  if (accept_stats.empty()) return 0.0;
  return std::accumulate(accept_stats.begin(), accept_stats.end(), 0.0) / static_cast<double>(accept_stats.size());
}

LeapfrogResult leapfrog(const Eigen::VectorXd& position, const Eigen::VectorXd& momentum, const Target& target,
                        double step_size, int n_steps, const Eigen::VectorXd& inverse_mass) {
  if (!(step_size > 0.0)) throw Error("leapfrog step size must be positive");
  if (n_steps < 1) throw Error("leapfrog needs at least one step");
  Dynamics dyn(target, position.size());
  if (inverse_mass.size() > 0) dyn.set_inverse_mass(inverse_mass);
  PhasePoint z{position, momentum, Eigen::VectorXd::Zero(position.size()), 0.0};
  dyn.evaluate(z);
  LeapfrogResult out;
  for (int l = 0; l < n_steps; ++l) {
    if (z.log_density == kNegInf) {
      out.divergent = true;
      break;
    }
    dyn.evolve(z, step_size);
  }
  if (z.log_density == kNegInf || !z.q.allFinite() || !z.p.allFinite()) out.divergent = true;
  out.position = std::move(z.q);
  out.momentum = std::move(z.p);
  return out;
}

SampleChain hmc_sample(const Target& target, const Eigen::VectorXd& init, const HmcConfig& config) {
  HmcConfig cfg = config;
  cfg.algorithm = SamplerKind::hmc_fixed;
  return run_chain<StaticHmc>(target, init, cfg);
}

SampleChain nuts_sample(const Target& target, const Eigen::VectorXd& init, const HmcConfig& config) {
  HmcConfig cfg = config;
  cfg.algorithm = SamplerKind::nuts;
  return run_chain<Nuts>(target, init, cfg);
}

SampleChain sample(const Target& target, const Eigen::VectorXd& init, const HmcConfig& config) {
  return config.algorithm == SamplerKind::nuts ? nuts_sample(target, init, config) : hmc_sample(target, init, config);
}

Eigen::VectorXd default_init(Index n_params, std::uint64_t seed, double scale) {
  Rng rng(seed);
  Eigen::VectorXd out(n_params);
  for (Index i = 0; i < n_params; ++i) out(i) = scale * rng.normal();
  return out;
}

}  // namespace bayeshead
