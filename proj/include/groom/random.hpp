#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace groom {

/// Engine used by every simulation stream. std::mt19937_64 output is fully
/// specified by the standard, so streams are portable across toolchains.
using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a list of coordinates into one seed. Pure function of its inputs.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = mix64(master);
  for (auto c : coords) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

/// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Poisson variate by inversion with sequential search. Exact for the small
/// rates used by the tie-creation process.
int poisson(Rng& rng, double lambda);

}  // namespace groom
