#pragma once

#include <cstdint>
#include <random>

namespace gemmed {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a user seed and a stream tag
// (splitmix64 finalizer), so that each component draws from its own stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace streams {
inline constexpr std::uint64_t kPartition = 1;
inline constexpr std::uint64_t kGibbs = 2;
inline constexpr std::uint64_t kTrainData = 3;
inline constexpr std::uint64_t kTestData = 4;
inline constexpr std::uint64_t kRingTest = 5;
}  // namespace streams

}  // namespace gemmed
