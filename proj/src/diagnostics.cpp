#include "bayeshead/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "bayeshead/error.hpp"

namespace bayeshead {

namespace {

void require_draws(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.empty()) throw Error("diagnostics need at least one chain");
  for (const auto& c : chains) {
    if (c.size() < 4) throw Error("diagnostics need at least 4 draws per chain");
    if (c.size() != chains.front().size()) throw Error("chains must have equal length");
  }
}

double variance(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

/// Biased autocovariance at `lag`.
double autocovariance(const Eigen::VectorXd& v, double mean, Index lag) {
  const Index n = v.size();
  double acc = 0.0;
  for (Index i = 0; i + lag < n; ++i) acc += (v(i) - mean) * (v(i + lag) - mean);
  return acc / static_cast<double>(n);
}

}  // namespace

double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  require_draws(chains);
  const Index half = chains.front().size() / 2;
  std::vector<Eigen::VectorXd> halves;
  for (const auto& c : chains) {
    halves.push_back(c.head(half));
    halves.push_back(c.tail(half));
  }
  const double n = static_cast<double>(half);
  const double m = static_cast<double>(halves.size());
  Eigen::VectorXd means(halves.size());
  double within = 0.0;
  for (std::size_t k = 0; k < halves.size(); ++k) {
    means(static_cast<Index>(k)) = halves[k].mean();
    within += variance(halves[k]);
  }
  within /= m;
  const double between = n * (means.array() - means.mean()).square().sum() / (m - 1.0);
  if (within == 0.0) {
    return between == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
  }
  const double var_plus = (n - 1.0) / n * within + between / n;
  return std::sqrt(var_plus / within);
}

double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
  require_draws(chains);
  const std::size_t n_chains = chains.size();
  const Index n = chains.front().size();
  const double nd = static_cast<double>(n);

  std::vector<double> means(n_chains);
  double mean_var = 0.0;
  for (std::size_t k = 0; k < n_chains; ++k) {
    means[k] = chains[k].mean();
    mean_var += autocovariance(chains[k], means[k], 0) * nd / (nd - 1.0);
  }
  mean_var /= static_cast<double>(n_chains);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (n_chains > 1) {
    double grand = 0.0;
    for (double v : means) grand += v;
    grand /= static_cast<double>(n_chains);
    double between = 0.0;
    for (double v : means) between += (v - grand) * (v - grand);
    var_plus += between / static_cast<double>(n_chains - 1);
  }
  if (!(var_plus > 0.0)) return std::numeric_limits<double>::quiet_NaN();

  auto rho_at = [&](Index lag) {
    double acov = 0.0;
    for (std::size_t k = 0; k < n_chains; ++k) acov += autocovariance(chains[k], means[k], lag);
    acov /= static_cast<double>(n_chains);
    return 1.0 - (mean_var - acov) / var_plus;
  };

  std::vector<double> rho(static_cast<std::size_t>(n) + 1, 0.0);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = rho_at(1);
  rho[1] = rho_odd;
  Index t = 1;
  while (t < n - 5 && rho_even + rho_odd > 0.0) {
    rho_even = rho_at(t + 1);
    rho_odd = rho_at(t + 2);
    if (rho_even + rho_odd >= 0.0) {
      rho[static_cast<std::size_t>(t + 1)] = rho_even;
      rho[static_cast<std::size_t>(t + 2)] = rho_odd;
    }
    t += 2;
  }
  const Index max_t = t;
  if (rho_even > 0.0) rho[static_cast<std::size_t>(max_t + 1)] = rho_even;

  // Initial monotone sequence.
  for (Index s = 1; s <= max_t - 3; s += 2) {
    const auto i = static_cast<std::size_t>(s);
    if (rho[i + 1] + rho[i + 2] > rho[i - 1] + rho[i]) {
      rho[i + 1] = (rho[i - 1] + rho[i]) / 2.0;
      rho[i + 2] = rho[i + 1];
    }
  }

  double tau = -1.0;
  for (Index s = 0; s <= max_t; ++s) tau += 2.0 * rho[static_cast<std::size_t>(s)];
  tau += rho[static_cast<std::size_t>(max_t + 1)];
  const double total = static_cast<double>(n_chains) * nd;
  if (!(tau > 0.0)) return std::numeric_limits<double>::infinity();
  return total / tau;
}

ChainDiagnostics diagnostics(const std::vector<SampleChain>& chains) {
  if (chains.empty()) throw Error("diagnostics need at least one chain");
  const Index p = chains.front().n_params();
  const Index s = chains.front().n_draws();
  if (s < 4) throw Error("diagnostics need at least 4 draws per chain");
  ChainDiagnostics out;
  double accept = 0.0;
  for (const auto& c : chains) {
    if (c.n_params() != p || c.n_draws() != s) throw Error("chains must share the same shape");
    accept += c.mean_accept();
    out.divergences += c.divergences;
  }
  out.mean_accept = accept / static_cast<double>(chains.size());
  out.split_rhat.resize(p);
  out.ess.resize(p);
  std::vector<Eigen::VectorXd> column(chains.size());
  for (Index j = 0; j < p; ++j) {
    for (std::size_t k = 0; k < chains.size(); ++k) column[k] = chains[k].draws.col(j);
    out.split_rhat(j) = split_rhat(column);
    out.ess(j) = effective_sample_size(column);
  }
  return out;
}

ChainDiagnostics diagnostics(const SampleChain& chain) { return diagnostics(std::vector<SampleChain>{chain}); }

}  // namespace bayeshead
