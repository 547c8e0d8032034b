#pragma once

// Deterministic random streams. Every random object in the library is a pure
// function of a 64-bit seed; independent streams are obtained by hashing the
// parent seed with a stream tag.

#include <cstdint>
#include <random>

namespace sparse_testbench {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of child stream `tag` under `seed`.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(splitmix64(seed) ^ splitmix64(tag + 0x632BE59BD9B4E019ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

/// Stream tags used across modules.
namespace stream {
inline constexpr std::uint64_t kDesign = 0x64657369676EULL;      // "design"
inline constexpr std::uint64_t kNoise = 0x6E6F697365ULL;         // "noise"
inline constexpr std::uint64_t kPrior = 0x7072696F72ULL;         // "prior"
inline constexpr std::uint64_t kRedraw = 0x7265647261770000ULL;  // degenerate-design redraws
}  // namespace stream

}  // namespace sparse_testbench
