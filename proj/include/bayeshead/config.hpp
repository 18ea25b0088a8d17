#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bayeshead/data.hpp"
#include "bayeshead/error.hpp"
#include "bayeshead/model.hpp"
#include "bayeshead/sampler.hpp"

namespace bayeshead {

/// Invalid configuration or refused output location (CLI exit code 1).
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

enum class Experiment { iris_hmc, head_hmc, head_laplace, compare };

std::string to_string(Experiment e);

struct SamplerSettings {
  SamplerKind algorithm = SamplerKind::nuts;
  Index n_warmup = 1000;
  Index n_samples = 1000;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  MassKind mass = MassKind::diagonal;
  int n_leapfrog = 10;
  double step_size = 0.0;
  int n_chains = 1;
};

struct LaplaceSettings {
  double learning_rate = 1e-2;
  Index steps = 2000;
  Index batch_size = 0;
  double tolerance = 1e-6;
  Index n_mc_samples = 30;
  double precision_floor = 1e-8;
};

enum class EvalSplit { test, train };

struct RunConfig {
  Experiment experiment = Experiment::iris_hmc;
  std::uint64_t seed = 0;

  std::string data_path;  // as written in the config
  std::filesystem::path data_file;  // resolved against the config directory
  DataFormat format = DataFormat::csv;
  std::string qa_text_path;
  std::optional<std::filesystem::path> qa_text_file;
  double train_fraction = 0.8;
  bool standardize = true;

  ModelKind model = ModelKind::mlp;
  Index hidden_dim = 8;
  double prior_std = 1.0;

  SamplerSettings sampler;
  LaplaceSettings laplace;

  int n_bins = 10;
  double threshold = 0.5;
  EvalSplit eval_split = EvalSplit::test;
  std::vector<Index> entries;
  std::vector<std::string> marginals;
  std::vector<std::pair<std::string, std::string>> pair_candidates;  // empty: all W1 x W2 pairs (MLP)
  bool chain_csv = false;

  std::string output_dir;  // optional default for --out

  /// Normalised echo with every default filled in (output_dir excluded).
  nlohmann::json to_json() const;
};

struct ConfigResult {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;  // "field.path: message"
};

/// Validates a parsed document; relative paths resolve against `base_dir`.
ConfigResult validate_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ConfigResult validate_config_file(const std::filesystem::path& path,
                                  const std::vector<std::string>& overrides = {});

/// Applies `dotted.key=value` overrides (value parsed as JSON, else string).
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& overrides);

}  // namespace bayeshead
