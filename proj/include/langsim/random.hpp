#pragma once

#include <cstdint>
#include <random>

namespace langsim {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent generator seeds.
constexpr auto mix64(std::uint64_t x) -> std::uint64_t {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Generator for replicate `index` of a run seeded with `master`.
/// Streams for distinct (master, index) pairs are statistically independent
/// and do not depend on how replicates are scheduled across workers.
inline auto make_stream(std::uint64_t master, std::uint64_t index) -> Rng {
  auto a = mix64(master);
  auto b = mix64(a ^ mix64(index + 0x632be59bd9b4e019ULL));
  auto seq = std::seed_seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                           static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng{seq};
}

inline auto uniform01(Rng& rng) -> double {
  return std::uniform_real_distribution<double>{0.0, 1.0}(rng);
}

inline auto exponential(Rng& rng, double rate) -> double {
  return std::exponential_distribution<double>{rate}(rng);
}

// Uniform integer in [0, n).
inline auto uniform_index(Rng& rng, std::size_t n) -> std::size_t {
  return std::uniform_int_distribution<std::size_t>{0, n - 1}(rng);
}

}  // namespace langsim
