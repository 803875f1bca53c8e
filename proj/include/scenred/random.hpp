#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace scenred {

using Rng = std::mt19937_64;

/// splitmix64 finalizer over (base, stream); used to give every repetition
/// and every experiment instance its own reproducible stream.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// k distinct indices from [0, n), uniformly, in draw order.
std::vector<int> sample_without_replacement(int n, int k, Rng& rng);

}  // namespace scenred
