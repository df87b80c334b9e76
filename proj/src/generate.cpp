#include "sublab/generate.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace sublab {

double SplitMix64::gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

const char* to_string(MatrixClass klass) {
  switch (klass) {
    case MatrixClass::normal:
      return "normal";
    case MatrixClass::hermitian:
      return "hermitian";
    case MatrixClass::skew_hermitian:
      return "skew-hermitian";
    case MatrixClass::diagonalizable_nonnormal:
      return "diagonalizable-nonnormal";
    case MatrixClass::general:
      return "general";
  }
  return "general";
}

std::optional<MatrixClass> matrix_class_from_string(const std::string& name) {
  if (name == "normal") return MatrixClass::normal;
  if (name == "hermitian") return MatrixClass::hermitian;
  if (name == "skew-hermitian") return MatrixClass::skew_hermitian;
  if (name == "diagonalizable-nonnormal" || name == "diagonalizable")
    return MatrixClass::diagonalizable_nonnormal;
  if (name == "general") return MatrixClass::general;
  return std::nullopt;
}

SpectrumSpec SpectrumSpec::annulus(double r_min, double r_max) {
  SpectrumSpec s;
  s.kind = Kind::annulus;
  s.lo = r_min;
  s.hi = r_max;
  return s;
}

SpectrumSpec SpectrumSpec::real_interval(double a, double b) {
  SpectrumSpec s;
  s.kind = Kind::real_interval;
  s.lo = a;
  s.hi = b;
  return s;
}

SpectrumSpec SpectrumSpec::plus_minus_pairs(double lo, double hi) {
  SpectrumSpec s;
  s.kind = Kind::plus_minus_pairs;
  s.lo = lo;
  s.hi = hi;
  return s;
}

SpectrumSpec SpectrumSpec::imaginary_pairs(double lo, double hi) {
  SpectrumSpec s;
  s.kind = Kind::imaginary_pairs;
  s.lo = lo;
  s.hi = hi;
  return s;
}

SpectrumSpec SpectrumSpec::circle(Complex center, double radius) {
  SpectrumSpec s;
  s.kind = Kind::circle;
  s.center = center;
  s.radius = radius;
  return s;
}

SpectrumSpec SpectrumSpec::explicit_list(std::vector<Complex> values) {
  SpectrumSpec s;
  s.kind = Kind::explicit_list;
  s.values = std::move(values);
  return s;
}

namespace {

std::string format_double(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string format_complex(Complex z) {
  std::ostringstream os;
  os << z.real();
  if (z.imag() != 0.0) {
    os << (z.imag() >= 0.0 ? "+" : "-") << std::abs(z.imag()) << "i";
  }
  return os.str();
}

Complex parse_complex_token(const std::string& token) {
  // accepts "2", "-1.5", "i", "-i", "2i", "1+2i", "3-0.5i"
  std::string t = token;
  if (t.empty()) {
    throw contract_error("spectrum: empty complex literal");
  }
  const bool has_i = t.back() == 'i' || t.back() == 'I';
  if (!has_i) {
    return Complex(std::stod(t), 0.0);
  }
  t.pop_back();
  // split into real and imaginary parts on the last +/- that is not an exponent sign
  std::size_t split = std::string::npos;
  for (std::size_t i = t.size(); i-- > 1;) {
    if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos) {
    if (t.empty() || t == "+") return Complex(0.0, 1.0);
    if (t == "-") return Complex(0.0, -1.0);
    return Complex(0.0, std::stod(t));
  }
  const std::string re = t.substr(0, split);
  std::string im = t.substr(split);
  if (im == "+") im = "1";
  if (im == "-") im = "-1";
  return Complex(std::stod(re), std::stod(im));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string SpectrumSpec::describe() const {
  switch (kind) {
    case Kind::annulus:
      return "annulus:" + format_double(lo) + "," + format_double(hi);
    case Kind::real_interval:
      return "real-interval:" + format_double(lo) + "," + format_double(hi);
    case Kind::plus_minus_pairs:
      return "pm-pairs:" + format_double(lo) + "," + format_double(hi);
    case Kind::imaginary_pairs:
      return "im-pairs:" + format_double(lo) + "," + format_double(hi);
    case Kind::circle:
      return "circle:" + format_double(center.real()) + "," + format_double(center.imag()) + "," +
             format_double(radius);
    case Kind::explicit_list: {
      std::string out = "explicit:";
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ",";
        out += format_complex(values[i]);
      }
      return out;
    }
  }
  return {};
}

SpectrumSpec parse_spectrum(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) {
    throw contract_error("spectrum: expected '<kind>:<args>', got '" + text + "'");
  }
  const std::string kind = text.substr(0, colon);
  const std::vector<std::string> args = split(text.substr(colon + 1), ',');
  auto need = [&](std::size_t count) {
    if (args.size() != count) {
      throw contract_error("spectrum '" + kind + "': expected " + std::to_string(count) +
                           " arguments");
    }
  };
  try {
    if (kind == "annulus") {
      need(2);
      return SpectrumSpec::annulus(std::stod(args[0]), std::stod(args[1]));
    }
    if (kind == "real-interval") {
      need(2);
      return SpectrumSpec::real_interval(std::stod(args[0]), std::stod(args[1]));
    }
    if (kind == "pm-pairs") {
      need(2);
      return SpectrumSpec::plus_minus_pairs(std::stod(args[0]), std::stod(args[1]));
    }
    if (kind == "im-pairs") {
      need(2);
      return SpectrumSpec::imaginary_pairs(std::stod(args[0]), std::stod(args[1]));
    }
    if (kind == "circle") {
      need(3);
      return SpectrumSpec::circle(Complex(std::stod(args[0]), std::stod(args[1])),
                                  std::stod(args[2]));
    }
    if (kind == "explicit") {
      std::vector<Complex> values;
      values.reserve(args.size());
      for (const std::string& a : args) {
        values.push_back(parse_complex_token(a));
      }
      return SpectrumSpec::explicit_list(std::move(values));
    }
  } catch (const std::invalid_argument&) {
    throw contract_error("spectrum '" + text + "': malformed numeric argument");
  }
  throw contract_error("spectrum: unknown kind '" + kind + "'");
}

namespace {

constexpr double kZeroEigenvalueGuard = 1e-12;

double spectrum_scale(const SpectrumSpec& spec) {
  switch (spec.kind) {
    case SpectrumSpec::Kind::annulus:
    case SpectrumSpec::Kind::plus_minus_pairs:
    case SpectrumSpec::Kind::imaginary_pairs:
      return std::max(std::abs(spec.lo), std::abs(spec.hi));
    case SpectrumSpec::Kind::real_interval:
      return std::max(std::abs(spec.lo), std::abs(spec.hi));
    case SpectrumSpec::Kind::circle:
      return std::abs(spec.center) + std::abs(spec.radius);
    case SpectrumSpec::Kind::explicit_list: {
      double s = 0.0;
      for (Complex v : spec.values) {
        s = std::max(s, std::abs(v));
      }
      return s;
    }
  }
  return 1.0;
}

}  // namespace

DenseVector sample_spectrum(const SpectrumSpec& spec, std::size_t n, SplitMix64& rng) {
  if (n < 1) {
    throw contract_error("sample_spectrum: n must be positive");
  }
  const double scale = spectrum_scale(spec);
  const double floor = kZeroEigenvalueGuard * (scale > 0.0 ? scale : 1.0);
  DenseVector lambda(n);

  auto draw_nonzero = [&](auto&& draw) {
    Complex z = draw();
    while (std::abs(z) < floor) {
      z = draw();
    }
    return z;
  };

  using Kind = SpectrumSpec::Kind;
  switch (spec.kind) {
    case Kind::annulus: {
      if (spec.lo < 0.0 || spec.hi < spec.lo) {
        throw contract_error("annulus spectrum: need 0 <= r_min <= r_max");
      }
      for (std::size_t i = 0; i < n; ++i) {
        lambda[i] = draw_nonzero([&] {
          const double r =
              std::sqrt(spec.lo * spec.lo + rng.uniform() * (spec.hi * spec.hi - spec.lo * spec.lo));
          const double theta = 2.0 * std::numbers::pi * rng.uniform();
          return Complex(r * std::cos(theta), r * std::sin(theta));
        });
      }
      break;
    }
    case Kind::real_interval: {
      if (spec.hi < spec.lo) {
        throw contract_error("real-interval spectrum: need a <= b");
      }
      for (std::size_t i = 0; i < n; ++i) {
        lambda[i] = draw_nonzero(
            [&] { return Complex(spec.lo + rng.uniform() * (spec.hi - spec.lo), 0.0); });
      }
      break;
    }
    case Kind::plus_minus_pairs:
    case Kind::imaginary_pairs: {
      if (spec.lo < 0.0 || spec.hi < spec.lo) {
        throw contract_error("pair spectrum: need 0 <= lo <= hi");
      }
      const bool imaginary = spec.kind == Kind::imaginary_pairs;
      for (std::size_t i = 0; i < n; i += 2) {
        const Complex mu = draw_nonzero([&] {
          const double m = spec.lo + rng.uniform() * (spec.hi - spec.lo);
          return imaginary ? Complex(0.0, m) : Complex(m, 0.0);
        });
        lambda[i] = mu;
        if (i + 1 < n) {
          lambda[i + 1] = -mu;
        }
      }
      break;
    }
    case Kind::circle: {
      if (spec.radius < 0.0) {
        throw contract_error("circle spectrum: radius must be nonnegative");
      }
      for (std::size_t i = 0; i < n; ++i) {
        lambda[i] = draw_nonzero([&] {
          const double theta = 2.0 * std::numbers::pi * rng.uniform();
          return spec.center + spec.radius * Complex(std::cos(theta), std::sin(theta));
        });
      }
      break;
    }
    case Kind::explicit_list: {
      if (spec.values.size() != n) {
        throw contract_error("explicit spectrum: value count must equal n");
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(spec.values[i]) < floor) {
          throw contract_error("explicit spectrum: eigenvalues must be nonzero");
        }
        lambda[i] = spec.values[i];
      }
      break;
    }
  }
  return lambda;
}

namespace {

// QR of a seeded complex Gaussian with the R diagonal phase-normalized to be
// real positive, which makes the unitary factor unique for a given seed.
DenseMatrix seeded_unitary(std::size_t n, SplitMix64& rng) {
  DenseMatrix g(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      g(i, j) = rng.gaussian_complex();
    }
  }
  auto [q, r] = householder_qr(g);
  for (std::size_t j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    const Complex phase = a > 0.0 ? d / a : Complex(1.0);
    for (std::size_t i = 0; i < n; ++i) {
      q(i, j) *= phase;
    }
  }
  return q;
}

DenseVector seeded_unit_rhs(std::size_t n, SplitMix64& rng) {
  DenseVector b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = rng.gaussian_complex();
  }
  const double bn = norm(b);
  return (1.0 / bn) * b;
}

DenseMatrix scale_columns(const DenseMatrix& a, const DenseVector& s) {
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const Complex sj = s[j];
    for (std::size_t i = 0; i < a.rows(); ++i) {
      out(i, j) = a(i, j) * sj;
    }
  }
  return out;
}

void verify_class_defect(const SystemInstance& sys) {
  const double anorm = frobenius_norm(sys.a);
  const DenseMatrix ah = hermitian_transpose(sys.a);
  if (sys.klass == MatrixClass::hermitian &&
      frobenius_norm(sys.a - ah) > 1e-12 * anorm) {
    throw numerical_error("generator: hermitian defect check failed");
  }
  if (sys.klass == MatrixClass::skew_hermitian &&
      frobenius_norm(sys.a + ah) > 1e-12 * anorm) {
    throw numerical_error("generator: skew-hermitian defect check failed");
  }
  if (spectral_reconstruction_defect(sys) > 1e-10) {
    throw numerical_error("generator: spectral reconstruction defect check failed");
  }
  if (sys.spectral && is_normal_class(sys.klass)) {
    const DenseMatrix& v = sys.spectral->v;
    const double gram_defect =
        frobenius_norm(hermitian_transpose(v) * v - DenseMatrix::identity(v.cols()));
    if (gram_defect > 1e-12 * static_cast<double>(v.cols())) {
      throw numerical_error("generator: eigenvector basis is not unitary");
    }
  }
}

SystemInstance build_normal_like(std::size_t n, const SpectrumSpec& spec, std::uint64_t seed,
                                 MatrixClass klass) {
  if (n < 2) {
    throw contract_error("generator: n must be at least 2");
  }
  SplitMix64 rng(seed);
  DenseVector lambda = sample_spectrum(spec, n, rng);
  DenseMatrix v = seeded_unitary(n, rng);
  DenseMatrix a = scale_columns(v, lambda) * hermitian_transpose(v);

  SystemInstance sys;
  sys.a = std::move(a);
  sys.b = seeded_unit_rhs(n, rng);
  sys.x0 = DenseVector(n);
  sys.klass = klass;
  sys.spectral = SpectralForm{std::move(v), std::move(lambda), klass, 1.0, 1.0};
  sys.seed = seed;
  verify_class_defect(sys);
  return sys;
}

}  // namespace

double spectral_reconstruction_defect(const SystemInstance& sys) {
  if (!sys.spectral) {
    return 0.0;
  }
  const SpectralForm& sf = *sys.spectral;
  const DenseMatrix lhs = sys.a * sf.v;
  const DenseMatrix rhs = scale_columns(sf.v, sf.lambda);
  const double scale = frobenius_norm(sys.a) * frobenius_norm(sf.v);
  return scale > 0.0 ? frobenius_norm(lhs - rhs) / scale : 0.0;
}

SystemInstance gen_normal(std::size_t n, const SpectrumSpec& spec, std::uint64_t seed) {
  return build_normal_like(n, spec, seed, MatrixClass::normal);
}

SystemInstance gen_hermitian(std::size_t n, const SpectrumSpec& spec, std::uint64_t seed) {
  using Kind = SpectrumSpec::Kind;
  if (spec.kind == Kind::explicit_list) {
    for (Complex v : spec.values) {
      if (v.imag() != 0.0) {
        throw contract_error("gen_hermitian: spectrum must be real");
      }
    }
  } else if (spec.kind != Kind::real_interval && spec.kind != Kind::plus_minus_pairs) {
    throw contract_error("gen_hermitian: spectrum must be real");
  }
  return build_normal_like(n, spec, seed, MatrixClass::hermitian);
}

SystemInstance gen_skew_hermitian(std::size_t n, const SpectrumSpec& spec, std::uint64_t seed) {
  using Kind = SpectrumSpec::Kind;
  if (spec.kind == Kind::explicit_list) {
    for (Complex v : spec.values) {
      if (v.real() != 0.0) {
        throw contract_error("gen_skew_hermitian: spectrum must be purely imaginary");
      }
    }
  } else if (spec.kind != Kind::imaginary_pairs) {
    throw contract_error("gen_skew_hermitian: spectrum must be purely imaginary");
  }
  return build_normal_like(n, spec, seed, MatrixClass::skew_hermitian);
}

SystemInstance gen_diagonalizable(std::size_t n, const SpectrumSpec& spec, double target_kappa,
                                  std::uint64_t seed) {
  if (n < 2) {
    throw contract_error("gen_diagonalizable: n must be at least 2");
  }
  if (target_kappa < 1.0) {
    throw contract_error("gen_diagonalizable: target condition number must be >= 1");
  }
  if (target_kappa > 1e6) {
    throw conditioning_error(
        "gen_diagonalizable: condition numbers above 1e6 spoil the reconstruction defect");
  }

  SplitMix64 rng(seed);
  DenseVector lambda = sample_spectrum(spec, n, rng);
  DenseMatrix u1 = seeded_unitary(n, rng);
  DenseMatrix u2 = seeded_unitary(n, rng);

  // Geometric singular-value grading 1 .. 1/kappa makes kappa(V) exact.
  DenseVector grades(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = static_cast<double>(i) / static_cast<double>(n - 1);
    grades[i] = std::pow(target_kappa, -e);
  }
  DenseMatrix v = scale_columns(u1, grades) * u2;

  // V^{-1} = U2^H diag(1/grades) U1^H assembled analytically.
  DenseVector inv_grades(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_grades[i] = 1.0 / grades[i].real();
  }
  DenseMatrix v_inv = scale_columns(hermitian_transpose(u2), inv_grades) * hermitian_transpose(u1);
  DenseMatrix a = scale_columns(v, lambda) * v_inv;

  const MatrixClass klass =
      target_kappa == 1.0 ? MatrixClass::normal : MatrixClass::diagonalizable_nonnormal;

  SystemInstance sys;
  sys.a = std::move(a);
  sys.b = seeded_unit_rhs(n, rng);
  sys.x0 = DenseVector(n);
  sys.klass = klass;
  sys.spectral =
      SpectralForm{std::move(v), std::move(lambda), klass, target_kappa, 1.0 / target_kappa};
  sys.seed = seed;
  verify_class_defect(sys);
  return sys;
}

}  // namespace sublab
