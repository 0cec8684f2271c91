#pragma once

#include <cstdint>
#include <random>

namespace sanvaad {

using Rng = std::mt19937_64;

/// Independent generator for a named sub-stream of one master seed.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace sanvaad
