#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bayeshead/config.hpp"
#include "bayeshead/diagnostics.hpp"
#include "bayeshead/experiments.hpp"
#include "bayeshead/serialize.hpp"

using namespace bayeshead;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int report_errors(const std::vector<std::string>& errors) {
  std::cerr << "invalid configuration:\n";
  for (const auto& e : errors) std::cerr << "  " << e << '\n';
  return kExitValidation;
}

int inspect(const std::string& path) {
  const SampleChain chain = load_chain(path);
  std::printf("draws: %lld\nparameters: %lld\nseed: %llu\nstep size: %.6g\nmean accept: %.4f\ndivergences: %lld\n",
              static_cast<long long>(chain.n_draws()), static_cast<long long>(chain.n_params()),
              static_cast<unsigned long long>(chain.seed), chain.step_size_final, chain.mean_accept(),
              static_cast<long long>(chain.divergences));
  std::printf("tensors:");
  for (const auto& t : chain.layout.tensors()) {
    std::printf(" %s[%lldx%lld]", t.name.c_str(), static_cast<long long>(t.rows), static_cast<long long>(t.cols));
  }
  std::printf("\n");
  if (chain.n_draws() < 4) return 0;
  const ChainDiagnostics d = diagnostics(chain);
  double max_rhat = 0.0;
  double min_ess = 0.0;
  Index worst = 0;
  for (Index j = 0; j < d.split_rhat.size(); ++j) {
    if (d.split_rhat(j) > max_rhat) {
      max_rhat = d.split_rhat(j);
      worst = j;
    }
    if (j == 0 || d.ess(j) < min_ess) min_ess = d.ess(j);
  }
  std::printf("max split-Rhat: %.4f (%s)\nmin ESS: %.1f\n", max_rhat, chain.layout.coordinate_name(worst).c_str(),
              min_ess);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian heads for small classifiers: HMC/NUTS and Laplace posteriors with calibration reports"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool force = false;
  std::vector<std::string> overrides;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", config_path, "run configuration (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (default: output.dir from the config)");
  run->add_flag("--force", force, "write into a non-empty output directory");
  run->add_option("--seed", seed, "override the configured seed");
  run->add_option("--set", overrides, "override a config field, e.g. sampler.n_samples=200");

  auto* validate = app.add_subcommand("validate", "check a config and print it with defaults filled in");
  validate->add_option("--config", config_path, "run configuration (JSON)")->required();
  validate->add_option("--set", overrides, "override a config field");

  std::string chain_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "print shape and diagnostics of a saved chain");
  inspect_cmd->add_option("chain", chain_path, "chain file (.bhsc)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  try {
    if (*inspect_cmd) return inspect(chain_path);

    if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
    const ConfigResult parsed = validate_config_file(config_path, overrides);
    if (!parsed.config) return report_errors(parsed.errors);
    const RunConfig& cfg = *parsed.config;

    if (*validate) {
      std::cout << cfg.to_json().dump(2) << '\n';
      return 0;
    }

    if (out_dir.empty()) out_dir = cfg.output_dir;
    if (out_dir.empty()) return report_errors({"output.dir: no output directory (pass --out DIR)"});
    const RunResult result = run_experiment(cfg, out_dir, force, &std::cout);
    std::cout << "wrote " << result.files.size() << " files to " << out_dir << '\n';
    return 0;
  } catch (const ValidationError& e) {
    return report_errors(e.errors());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
