#pragma once

#include <cstdint>
#include <random>

namespace compstat {

/// SplitMix64 mixer; bijective scramble of a 64-bit value.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic per-stream seed derivation, O(1) per stream so independent
/// trials can be seeded (and run) in any order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master + (stream + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Uniform double in [0, 1) with exactly reproducible bits on every platform
/// (std::uniform_real_distribution is implementation-defined; this is not).
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace compstat
