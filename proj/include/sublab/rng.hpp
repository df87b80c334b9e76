#pragma once

#include <cstdint>

#include "sublab/dense.hpp"

namespace sublab {

/// SplitMix64 stream generator. The i-th output is a pure mixing function of
/// seed + i * 0x9E3779B97F4A7C15, so identical seeds reproduce identical
/// streams on any platform; this is what makes generated instances portable.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1); safe as a logarithm argument.
  double uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (no rejection, fixed draw count).
  double gaussian();

  /// Independent unit-variance real and imaginary parts.
  Complex gaussian_complex() {
    const double re = gaussian();
    const double im = gaussian();
    return {re, im};
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace sublab
