#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sublab/rng.hpp"
#include "sublab/system.hpp"

namespace sublab {

/// Recipe for an eigenvalue multiset. All kinds produce nonzero eigenvalues.
struct SpectrumSpec {
  enum class Kind {
    annulus,           ///< |lambda| in [lo, hi], uniform angle, uniform in area
    real_interval,     ///< lambda real in [lo, hi]
    plus_minus_pairs,  ///< +/-mu pairs, mu in [lo, hi]
    imaginary_pairs,   ///< +/-(i mu) pairs, mu in [lo, hi]
    circle,            ///< center + radius * e^{i theta}
    explicit_list,
  };

  Kind kind = Kind::annulus;
  double lo = 1.0;
  double hi = 2.0;
  Complex center{};
  double radius = 0.0;
  std::vector<Complex> values;

  static SpectrumSpec annulus(double r_min, double r_max);
  static SpectrumSpec real_interval(double a, double b);
  static SpectrumSpec plus_minus_pairs(double lo, double hi);
  static SpectrumSpec imaginary_pairs(double lo, double hi);
  static SpectrumSpec circle(Complex center, double radius);
  static SpectrumSpec explicit_list(std::vector<Complex> values);

  std::string describe() const;
};

/// Parses the CLI spelling, e.g. "annulus:1,2" or "explicit:1+2i,3".
SpectrumSpec parse_spectrum(const std::string& text);

DenseVector sample_spectrum(const SpectrumSpec& spec, std::size_t n, SplitMix64& rng);

/// A = V diag(lambda) V^H with V unitary from a seeded complex Gaussian QR.
SystemInstance gen_normal(std::size_t n, const SpectrumSpec& spec, std::uint64_t seed);

/// Real spectrum variant; the result satisfies ||A - A^H|| <= 1e-12 ||A||.
SystemInstance gen_hermitian(std::size_t n, const SpectrumSpec& spec, std::uint64_t seed);

/// Purely imaginary spectrum variant; ||A + A^H|| <= 1e-12 ||A||.
SystemInstance gen_skew_hermitian(std::size_t n, const SpectrumSpec& spec, std::uint64_t seed);

/// A = V diag(lambda) V^{-1} where V = U1 diag(1 .. 1/kappa) U2 has condition
/// number exactly kappa. Caps kappa at 1e6.
SystemInstance gen_diagonalizable(std::size_t n, const SpectrumSpec& spec, double target_kappa,
                                  std::uint64_t seed);

}  // namespace sublab
