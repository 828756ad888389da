#pragma once

#include <cstdint>
#include <random>

namespace loadshape {

// Pseudo-random engine used everywhere; recorded in run metadata.
using Rng = std::mt19937_64;
inline constexpr const char* kRngAlgorithm = "mt19937_64";

// SplitMix64 finalizer. Used to derive independent child seeds from a master
// seed and a stream index, so parallel or recursive work stays reproducible.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace loadshape
