#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace heston {

// Counter-based generator: every draw is a pure function of
// (seed, path, step, component), so adding paths never reshuffles old ones.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t comp) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ path);
  h = splitmix64(h ^ (step * 0x100000001b3ULL));
  return splitmix64(h ^ (comp + 0x632be59bd9b4e019ULL));
}

// Uniform on the open interval (0, 1).
inline double uniform01(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t comp) {
  return (static_cast<double>(counter_hash(seed, path, step, comp) >> 11) + 0.5) * 0x1.0p-53;
}

// Two independent standard normals by Box-Muller.
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
  const double u1 = uniform01(seed, path, step, 0), u2 = uniform01(seed, path, step, 1);
  const double rad = std::sqrt(-2.0 * std::log(u1)), ang = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

}  // namespace heston
