#pragma once

#include <filesystem>

#include "bayeshead/laplace.hpp"
#include "bayeshead/model.hpp"
#include "bayeshead/sampler.hpp"

namespace bayeshead {

// Binary containers share one prefix: 4-byte magic, u16 version (1), then a
// layout block (u32 P, u32 tensor count, per tensor: u32-length-prefixed name,
// u32 rows, u32 cols). Payloads are little-endian f64.
//
//   BHPV  layout, P values
//   BHSC  layout, u32 S, S*P draws row-major, S accept stats, S i32 tree depths,
//         u64 divergences, f64 final step size, P inverse-mass entries, u64 seed
//   BHGP  layout, P means, P variances

void save_param_vector(const ParamVector& params, const std::filesystem::path& path);
ParamVector load_param_vector(const std::filesystem::path& path);

void save_chain(const SampleChain& chain, const std::filesystem::path& path);
SampleChain load_chain(const std::filesystem::path& path);

void save_gaussian(const GaussianPosterior& posterior, const std::filesystem::path& path);
GaussianPosterior load_gaussian(const std::filesystem::path& path);

/// One row per draw, header of coordinate names (`W1[0,1]`, ...).
void save_chain_csv(const SampleChain& chain, const std::filesystem::path& path);

}  // namespace bayeshead
