#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace photonstat {

using Engine = std::mt19937_64;

/// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of sub-stream `index` (segment, trajectory, detector) of a master seed.
/// Streams are keyed by (master, index) only, so results do not depend on
/// how work is scheduled across threads.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Engine make_engine(std::uint64_t master, std::uint64_t index) {
  return Engine(derive_seed(master, index));
}

/// Uniform double in [0, 1) with 53 random bits; independent of libstdc++'s
/// generate_canonical so streams are stable across standard libraries.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1], safe for log().
inline double uniform01_open(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (one value per call; deterministic).
double standard_normal(Engine& eng);

/// Exponential waiting time with the given rate.
inline double exponential(Engine& eng, double rate) {
  return -std::log(uniform01_open(eng)) / rate;
}

}  // namespace photonstat
