#pragma once

// Counter-based stream derivation: every (trial, factor) draw is a pure
// function of the root seed and its labels, so results never depend on how
// trials are scheduled across workers.

#include <cstdint>

namespace prechannel {

struct SeedSpec {
  std::uint64_t root = 0;
};

/// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_word(SeedSpec seed, std::uint64_t trial, std::uint64_t factor) {
  return mix64(mix64(mix64(seed.root) ^ trial) ^ (factor * 0xd1b54a32d192ed03ULL));
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double stream_uniform(SeedSpec seed, std::uint64_t trial, std::uint64_t factor) {
  return static_cast<double>(stream_word(seed, trial, factor) >> 11) * 0x1.0p-53;
}

}  // namespace prechannel
