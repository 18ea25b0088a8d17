#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bayeshead/config.hpp"

namespace bayeshead {

struct RunResult {
  nlohmann::json metrics;
  std::vector<std::filesystem::path> files;  // relative to the output directory, sorted
};

/// Creates `dir`, refusing a non-empty directory unless `force` (ValidationError).
void prepare_output_dir(const std::filesystem::path& dir, bool force);

/// Runs one experiment and writes its artifacts, including metrics.json.
/// Progress lines go to `log` when given; metrics.json never contains
/// timings or the output location, so reruns are byte-identical.
RunResult run_experiment(const RunConfig& config, const std::filesystem::path& out_dir, bool force,
                         std::ostream* log = nullptr);

/// Seed for an internal stream (data split, init, chains, ...) derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// `W1[0,1]` -> `W1_0_1`, for file names.
std::string file_stem(const std::string& coordinate);

}  // namespace bayeshead
