#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nnipls {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named substream of a global seed.
/// Every random consumer (dataset, directions, velocities, noise, ...) draws
/// from its own substream so modules can be re-seeded independently.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  return Rng(substream_seed(seed, name, index));
}

}  // namespace nnipls
