#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nbf {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// (seed, counter) pair so that items can be generated in any order.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter,
                                    std::uint64_t stream = 0) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + counter);
}

/// Portable random source. std::mt19937_64 is fully specified by the
/// standard; the distributions below avoid the implementation-defined
/// std:: distribution algorithms so that output is identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no cached second value).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nbf
