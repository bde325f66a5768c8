#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mzisim {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent sub-seed from a master seed and a path of stream ids.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix64(master);
  for (auto id : path) s = mix64(s ^ mix64(id + 0x632BE59BD9B4E019ULL));
  return s;
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace mzisim
