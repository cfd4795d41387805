#pragma once

#include <cstdint>

namespace gridloc {

/// SplitMix64 mix of (seed, stream): independent sub-seeds for the parts of a run.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace seed_stream {
inline constexpr std::uint64_t kDqnInit = 1;
inline constexpr std::uint64_t kDqnTrain = 2;
inline constexpr std::uint64_t kBaselineInit = 3;
inline constexpr std::uint64_t kBaselineShuffle = 4;
inline constexpr std::uint64_t kSplit = 5;
inline constexpr std::uint64_t kTabular = 6;
}  // namespace seed_stream

}  // namespace gridloc
