#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sparselab {

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable seed derivation: the result depends only on the inputs, never on
/// call order.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = mix64(master);
  for (auto p : parts) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

/// Counter-based uniform draw in [0, 1) keyed by (seed, counter).
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t h = mix64(mix64(seed) ^ mix64(counter ^ 0xd1b54a32d192ed03ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

inline double uniform_real(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace sparselab
