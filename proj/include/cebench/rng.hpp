// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random number utilities. Every stochastic component of the
// framework draws through this wrapper so that a (seed, tag) pair fully
// determines the byte-exact output on any platform: the engine is the
// standard-specified mt19937_64 and all distributions (uniform, Gaussian,
// bounded integers, QPSK symbols) are implemented here explicitly instead
// of relying on implementation-defined <random> distributions.

#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace cebench {

/// Stream tags used to derive independent sub-seeds from one sample seed.
namespace seed_tag {
inline constexpr std::uint64_t kAxes = 1;     // dataset axis selection
inline constexpr std::uint64_t kChannel = 2;  // fading realization
inline constexpr std::uint64_t kNoise = 3;    // receiver noise
inline constexpr std::uint64_t kData = 4;     // payload bits
inline constexpr std::uint64_t kPilot = 5;    // pilot symbol values
}  // namespace seed_tag

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from (seed, tag); also used to give
/// every dataset sample its own seed from (master seed, sample index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed ^ (0xD1B54A32D192ED03ull * (tag + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b >> 17) ^ (b << 23);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n) by rejection sampling.
  std::uint64_t bounded(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller (no state cached between calls).
  double gaussian() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Circularly symmetric complex Gaussian with E|z|^2 = 1.
  std::complex<double> cgaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re * 0.7071067811865475244, im * 0.7071067811865475244};
  }

  /// Random Gray-coded QPSK point, |z| = 1.
  std::complex<double> qpsk() {
    const std::uint64_t bits = bounded(4);
    const double a = (bits & 1) ? -0.7071067811865475244 : 0.7071067811865475244;
    const double b = (bits & 2) ? -0.7071067811865475244 : 0.7071067811865475244;
    return {a, b};
  }

  /// Fisher-Yates shuffle with this engine (portable, unlike std::shuffle).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace cebench
