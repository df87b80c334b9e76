#include "sublab/gmres.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

namespace sublab {

namespace {

constexpr double kBreakdownTolerance = 1e-14;

using LongComplex = std::complex<long double>;
using LongVector = std::vector<LongComplex>;

void require(bool ok, const char* message) {
  if (!ok) {
    throw contract_error(message);
  }
}

}  // namespace

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::tolerance_reached:
      return "tolerance-reached";
    case StopReason::max_cycles:
      return "max-cycles";
    case StopReason::exact_convergence:
      return "exact-convergence";
  }
  return "max-cycles";
}

ResidualPolynomial conjugate_coefficients(const ResidualPolynomial& p) {
  ResidualPolynomial out;
  out.coefficients.reserve(p.coefficients.size());
  for (Complex c : p.coefficients) {
    out.coefficients.push_back(std::conj(c));
  }
  return out;
}

ArnoldiDecomposition arnoldi(const DenseMatrix& a, const DenseVector& v, std::size_t m) {
  require(a.rows() == a.cols(), "arnoldi: matrix must be square");
  const std::size_t n = a.rows();
  require(v.dim() == n, "arnoldi: vector dimension mismatch");
  require(m >= 1 && m <= n, "arnoldi: require 1 <= m <= n");
  const double vnorm = norm(v);
  require(vnorm > 0.0, "arnoldi: starting vector must be nonzero");

  const double breakdown_tol = kBreakdownTolerance * frobenius_norm(a);

  std::vector<DenseVector> basis;
  basis.reserve(m + 1);
  basis.push_back((1.0 / vnorm) * v);

  DenseMatrix h(m + 1, m);
  std::optional<std::size_t> breakdown;
  std::size_t steps = 0;

  for (std::size_t j = 0; j < m; ++j) {
    DenseVector w = matvec(a, basis[j]);
    // Modified Gram-Schmidt plus one full reorthogonalization pass; the
    // second pass keeps the basis orthogonal to machine precision so the
    // tiny slacks measured downstream are meaningful.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i <= j; ++i) {
        const Complex hij = dot(basis[i], w);
        w = w - hij * basis[i];
        h(i, j) += hij;
      }
    }
    const double wnorm = norm(w);
    steps = j + 1;
    if (wnorm <= breakdown_tol) {
      breakdown = steps;
      break;
    }
    h(j + 1, j) = wnorm;
    basis.push_back((1.0 / wnorm) * w);
  }

  ArnoldiDecomposition dec;
  dec.steps = steps;
  dec.breakdown_step = breakdown;
  const std::size_t basis_cols = basis.size();
  dec.basis = DenseMatrix(n, basis_cols);
  for (std::size_t j = 0; j < basis_cols; ++j) {
    std::copy(basis[j].entries().begin(), basis[j].entries().end(), dec.basis.col(j));
  }
  const std::size_t h_rows = breakdown ? steps : steps + 1;
  dec.hessenberg = DenseMatrix(h_rows, steps);
  for (std::size_t j = 0; j < steps; ++j) {
    for (std::size_t i = 0; i < h_rows; ++i) {
      dec.hessenberg(i, j) = h(i, j);
    }
  }
  return dec;
}

namespace {

// Hessenberg least squares min ||beta e1 - H y|| by Givens rotations. The
// estimate after step i is |g_{i+1}|, a provably nonincreasing sequence
// because each rotation scales the trailing entry by |sin| <= 1.
struct HessenbergLeastSquares {
  std::vector<Complex> y;
  std::vector<double> estimates;  // per-step residual estimates, size = cols
};

HessenbergLeastSquares solve_hessenberg_ls(const DenseMatrix& h, double beta) {
  const std::size_t rows = h.rows();
  const std::size_t cols = h.cols();

  DenseMatrix r(rows, cols);
  std::vector<Complex> g(rows, Complex(0.0));
  g[0] = beta;

  struct Rotation {
    Complex a;  // pre-rotation diagonal entry
    double b;   // subdiagonal entry, real nonnegative
    double r2;
  };
  std::vector<Rotation> rotations;
  rotations.reserve(cols);

  HessenbergLeastSquares out;
  out.estimates.reserve(cols);

  for (std::size_t col = 0; col < cols; ++col) {
    std::vector<Complex> v(rows, Complex(0.0));
    const std::size_t filled = std::min(col + 2, rows);
    for (std::size_t i = 0; i < filled; ++i) {
      v[i] = h(i, col);
    }
    for (std::size_t i = 0; i < rotations.size() && i < col; ++i) {
      const auto& rot = rotations[i];
      if (rot.r2 == 0.0) {
        continue;
      }
      const Complex t1 = v[i];
      const Complex t2 = v[i + 1];
      v[i] = (std::conj(rot.a) * t1 + rot.b * t2) / rot.r2;
      v[i + 1] = (-rot.b * t1 + rot.a * t2) / rot.r2;
    }
    if (col + 1 < rows) {
      const Complex a = v[col];
      const double b = v[col + 1].real();
      const double r2 = std::hypot(std::abs(a), b);
      Rotation rot{a, b, r2};
      if (r2 > 0.0) {
        v[col] = r2;
        v[col + 1] = 0.0;
        const Complex g1 = g[col];
        const Complex g2 = g[col + 1];
        g[col] = (std::conj(a) * g1 + b * g2) / r2;
        g[col + 1] = (-b * g1 + a * g2) / r2;
      }
      rotations.push_back(rot);
      out.estimates.push_back(std::abs(g[col + 1]));
    } else {
      // square system (breakdown cycle): the least-squares residual is zero
      rotations.push_back(Rotation{0.0, 0.0, 0.0});
      out.estimates.push_back(0.0);
    }
    for (std::size_t i = 0; i < rows; ++i) {
      r(i, col) = v[i];
    }
  }

  out.y.resize(cols);
  for (std::size_t ii = cols; ii-- > 0;) {
    Complex s = g[ii];
    for (std::size_t k = ii + 1; k < cols; ++k) {
      s -= r(ii, k) * out.y[k];
    }
    const Complex d = r(ii, ii);
    if (std::abs(d) == 0.0) {
      throw numerical_error("gmres_cycle: singular projected system");
    }
    out.y[ii] = s / d;
  }
  return out;
}

struct CycleOutcome {
  CycleRecord record;
  DenseVector correction;
};

CycleOutcome run_cycle(const DenseMatrix& a, const DenseVector& r_entry, std::size_t m,
                       const RunOptions& options) {
  const double beta = norm(r_entry);
  require(beta > 0.0, "gmres_cycle: entry residual must be nonzero");

  ArnoldiDecomposition dec = arnoldi(a, r_entry, m);
  const std::size_t j = dec.steps;

  HessenbergLeastSquares ls = solve_hessenberg_ls(dec.hessenberg, beta);

  DenseVector u(a.rows());
  for (std::size_t col = 0; col < j; ++col) {
    const Complex yc = ls.y[col];
    const Complex* q = dec.basis.col(col);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      u[i] += yc * q[i];
    }
  }
  DenseVector r_exit = r_entry - matvec(a, u);

  CycleRecord rec;
  rec.entry_norm = beta;
  rec.breakdown = dec.breakdown_step.has_value();
  rec.iteration_norms.reserve(j + 1);
  rec.iteration_norms.push_back(beta);
  for (double e : ls.estimates) {
    rec.iteration_norms.push_back(e);
  }
  if (rec.breakdown) {
    // invariant Krylov subspace: the projected solve is exact
    rec.exit_norm = 0.0;
    rec.iteration_norms.back() = 0.0;
  } else {
    rec.exit_norm = norm(r_exit);
    rec.iteration_norms.back() = rec.exit_norm;
  }

  if (options.extract_polynomials && j <= kPolynomialDegreeCap) {
    try {
      rec.polynomial = extract_polynomial(a, r_entry, dec, ls.y);
    } catch (const conditioning_error&) {
      // left unset; callers needing the polynomial check for its presence
    }
  }
  rec.exit_residual = std::move(r_exit);
  return {std::move(rec), std::move(u)};
}

}  // namespace

CycleRecord gmres_cycle(const DenseMatrix& a, const DenseVector& r_entry, std::size_t m,
                        const RunOptions& options) {
  return run_cycle(a, r_entry, m, options).record;
}

ConvergenceReport restarted_gmres(const SystemInstance& sys, std::size_t m,
                                  std::size_t max_cycles, double rtol,
                                  const RunOptions& options) {
  const std::size_t n = sys.a.rows();
  require(sys.a.cols() == n, "restarted_gmres: matrix must be square");
  require(m >= 1 && m + 1 <= n, "restarted_gmres: require 1 <= m <= n-1");
  require(max_cycles >= 1, "restarted_gmres: need at least one cycle");
  require(rtol >= 0.0, "restarted_gmres: rtol must be nonnegative");
  require(sys.b.dim() == n && sys.x0.dim() == n, "restarted_gmres: vector dimension mismatch");

  DenseVector r = sys.b - matvec(sys.a, sys.x0);
  const double r0_norm = norm(r);
  const double scale = norm(sys.b) + frobenius_norm(sys.a) * norm(sys.x0);
  require(r0_norm > 1e-12 * scale,
          "restarted_gmres: initial residual is numerically zero; nothing to solve");

  ConvergenceReport report;
  report.n = n;
  report.m = m;
  report.klass = sys.klass;
  report.seed = sys.seed;
  report.initial_norm = r0_norm;
  if (options.store_residual_vectors) {
    report.initial_residual = r;
  }

  DenseVector x = sys.x0;
  for (std::size_t k = 1; k <= max_cycles; ++k) {
    CycleOutcome outcome = run_cycle(sys.a, r, m, options);
    CycleRecord& rec = outcome.record;
    rec.index = k;
    x = x + outcome.correction;
    DenseVector next_r = rec.exit_residual;
    if (!options.store_residual_vectors) {
      rec.exit_residual = DenseVector();
    }
    const bool exact = rec.breakdown || rec.exit_norm <= kExactConvergenceFloor * r0_norm;
    const bool hit_tol = rec.exit_norm <= rtol * r0_norm;
    report.cycles.push_back(std::move(rec));
    if (exact) {
      report.stop = StopReason::exact_convergence;
      break;
    }
    if (hit_tol) {
      report.stop = StopReason::tolerance_reached;
      break;
    }
    if (k == max_cycles) {
      report.stop = StopReason::max_cycles;
      break;
    }
    r = std::move(next_r);
  }

  report.ratios.reserve(report.cycles.size());
  for (const CycleRecord& rec : report.cycles) {
    report.ratios.push_back(rec.exit_norm / rec.entry_norm);
  }
  report.solution = std::move(x);
  return report;
}

namespace {

long double abs_long(LongComplex z) { return std::hypot(z.real(), z.imag()); }

LongVector matvec_long(const DenseMatrix& a, const LongVector& x) {
  LongVector y(a.rows(), LongComplex(0.0L));
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const LongComplex xj = x[j];
    const Complex* acol = a.col(j);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      y[i] += LongComplex(acol[i].real(), acol[i].imag()) * xj;
    }
  }
  return y;
}

}  // namespace

namespace {

LongComplex dot_long(const LongVector& x, const LongVector& y) {
  LongComplex s(0.0L);
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += std::conj(x[i]) * y[i];
  }
  return s;
}

long double norm_long(const LongVector& x) {
  long double s = 0.0L;
  for (const LongComplex& z : x) {
    s += z.real() * z.real() + z.imag() * z.imag();
  }
  return std::sqrt(s);
}

// The cycle's least-squares solution redone in extended precision: Arnoldi,
// Givens rotations, back substitution. The double-precision solution is
// accurate enough for residuals, but its rounding gets amplified by the
// Krylov-to-monomial change of basis, so the coefficients need better input.
struct ExtendedCycle {
  std::vector<LongVector> basis;  // q_0 .. q_{j-1}
  LongVector y;
};

ExtendedCycle extended_cycle_solution(const DenseMatrix& a, const DenseVector& r_entry,
                                      std::size_t j) {
  const std::size_t n = a.rows();
  ExtendedCycle out;
  out.basis.reserve(j);

  LongVector q0(n);
  for (std::size_t i = 0; i < n; ++i) {
    q0[i] = LongComplex(r_entry[i].real(), r_entry[i].imag());
  }
  const long double beta = norm_long(q0);
  for (LongComplex& z : q0) {
    z /= beta;
  }
  out.basis.push_back(std::move(q0));

  std::vector<LongVector> hcols(j);
  for (std::size_t col = 0; col < j; ++col) {
    hcols[col].assign(j + 1, LongComplex(0.0L));
    LongVector w = matvec_long(a, out.basis[col]);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i <= col; ++i) {
        const LongComplex hic = dot_long(out.basis[i], w);
        for (std::size_t r = 0; r < n; ++r) {
          w[r] -= hic * out.basis[i][r];
        }
        hcols[col][i] += hic;
      }
    }
    const long double wnorm = norm_long(w);
    hcols[col][col + 1] = wnorm;
    if (col + 1 < j) {
      if (wnorm == 0.0L) {
        throw conditioning_error("extract_polynomial: Krylov space collapsed early");
      }
      for (LongComplex& z : w) {
        z /= wnorm;
      }
      out.basis.push_back(std::move(w));
    }
  }

  // Givens least squares on the (j+1) x j extended-precision Hessenberg.
  LongVector g(j + 1, LongComplex(0.0L));
  g[0] = beta;
  struct Rot {
    LongComplex a;
    long double b;
    long double r2;
  };
  std::vector<Rot> rots;
  rots.reserve(j);
  for (std::size_t col = 0; col < j; ++col) {
    LongVector& v = hcols[col];
    for (std::size_t i = 0; i < rots.size(); ++i) {
      if (rots[i].r2 == 0.0L) {
        continue;
      }
      const LongComplex t1 = v[i];
      const LongComplex t2 = v[i + 1];
      v[i] = (std::conj(rots[i].a) * t1 + rots[i].b * t2) / rots[i].r2;
      v[i + 1] = (-rots[i].b * t1 + rots[i].a * t2) / rots[i].r2;
    }
    const LongComplex av = v[col];
    const long double bv = v[col + 1].real();
    const long double r2 = std::sqrt(std::norm(av) + bv * bv);
    if (r2 > 0.0L) {
      v[col] = r2;
      v[col + 1] = 0.0L;
      const LongComplex g1 = g[col];
      const LongComplex g2 = g[col + 1];
      g[col] = (std::conj(av) * g1 + bv * g2) / r2;
      g[col + 1] = (-bv * g1 + av * g2) / r2;
    }
    rots.push_back(Rot{av, bv, r2});
  }
  out.y.resize(j);
  for (std::size_t ii = j; ii-- > 0;) {
    LongComplex s = g[ii];
    for (std::size_t k = ii + 1; k < j; ++k) {
      s -= hcols[k][ii] * out.y[k];
    }
    const LongComplex d = hcols[ii][ii];
    if (abs_long(d) == 0.0L) {
      throw numerical_error("extract_polynomial: singular projected system");
    }
    out.y[ii] = s / d;
  }
  return out;
}

}  // namespace

ResidualPolynomial extract_polynomial(const DenseMatrix& a, const DenseVector& r_entry,
                                      const ArnoldiDecomposition& dec,
                                      const std::vector<Complex>& ls_solution) {
  const std::size_t j = ls_solution.size();
  require(j >= 1 && j == dec.steps, "extract_polynomial: solution size must match Arnoldi steps");
  require(j <= kPolynomialDegreeCap, "extract_polynomial: degree exceeds the monomial-basis cap");
  const std::size_t n = a.rows();
  require(r_entry.dim() == n, "extract_polynomial: dimension mismatch");

  ExtendedCycle cycle = extended_cycle_solution(a, r_entry, j);

  // Explicit Krylov columns r, A r, ..., A^{j-1} r; the change of basis is
  // the one ill-conditioned step of the whole pipeline.
  std::vector<LongVector> krylov(j);
  krylov[0].resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    krylov[0][i] = LongComplex(r_entry[i].real(), r_entry[i].imag());
  }
  for (std::size_t c = 1; c < j; ++c) {
    krylov[c] = matvec_long(a, krylov[c - 1]);
  }

  std::vector<long double> col_scale(j);
  for (std::size_t c = 0; c < j; ++c) {
    col_scale[c] = norm_long(krylov[c]);
    if (col_scale[c] == 0.0L) {
      throw conditioning_error("extract_polynomial: zero Krylov column");
    }
    for (LongComplex& z : krylov[c]) {
      z /= col_scale[c];
    }
  }

  // R = Q^H K_scaled is upper triangular up to roundoff since the Arnoldi
  // basis spans the same nested subspaces.
  std::vector<LongVector> rmat(j, LongVector(j, LongComplex(0.0L)));
  for (std::size_t c = 0; c < j; ++c) {
    for (std::size_t row = 0; row <= c; ++row) {
      rmat[c][row] = dot_long(cycle.basis[row], krylov[c]);
    }
  }
  constexpr long double kDiagonalFloor = 1e-10L;
  for (std::size_t c = 0; c < j; ++c) {
    if (abs_long(rmat[c][c]) < kDiagonalFloor) {
      throw conditioning_error(
          "extract_polynomial: Krylov matrix numerically rank deficient at degree " +
          std::to_string(j) + "; use a smaller restart parameter or a better-conditioned spectrum");
    }
  }

  LongVector chat(j);
  for (std::size_t ii = j; ii-- > 0;) {
    LongComplex s = cycle.y[ii];
    for (std::size_t k = ii + 1; k < j; ++k) {
      s -= rmat[k][ii] * chat[k];
    }
    chat[ii] = s / rmat[ii][ii];
  }

  ResidualPolynomial p;
  p.coefficients.resize(j + 1);
  p.coefficients[0] = 1.0;
  for (std::size_t c = 0; c < j; ++c) {
    const LongComplex coeff = chat[c] / col_scale[c];
    p.coefficients[c + 1] =
        Complex(-static_cast<double>(coeff.real()), -static_cast<double>(coeff.imag()));
  }
  return p;
}

DenseVector apply_polynomial(const ResidualPolynomial& p, const DenseMatrix& a,
                             const DenseVector& v) {
  require(!p.coefficients.empty(), "apply_polynomial: empty polynomial");
  require(a.rows() == a.cols() && a.cols() == v.dim(), "apply_polynomial: dimension mismatch");
  const std::size_t deg = p.degree();
  DenseVector w = p.coefficients[deg] * v;
  for (std::size_t k = deg; k-- > 0;) {
    w = matvec(a, w) + p.coefficients[k] * v;
  }
  return w;
}

OracleResult oracle_min_residual(const SpectralForm& spectral, const DenseVector& r_entry,
                                 std::size_t m) {
  require(is_normal_class(spectral.klass),
          "oracle_min_residual: requires a unitary eigenvector basis (normal class)");
  const std::size_t n = spectral.v.rows();
  require(r_entry.dim() == n, "oracle_min_residual: dimension mismatch");
  require(m >= 1, "oracle_min_residual: m must be positive");

  const DenseVector d = matvec(hermitian_transpose(spectral.v), r_entry);
  const double dnorm = norm(d);
  require(dnorm > 0.0, "oracle_min_residual: entry residual must be nonzero");

  // Count distinct eigenvalues that carry weight; a polynomial of degree m
  // can wipe the residual exactly iff there are at most m of them.
  double lambda_scale = 0.0;
  for (Complex lam : spectral.lambda.entries()) {
    lambda_scale = std::max(lambda_scale, std::abs(lam));
  }
  std::vector<Complex> distinct;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(d[i]) <= 1e-14 * dnorm) {
      continue;
    }
    const Complex lam = spectral.lambda[i];
    bool found = false;
    for (Complex seen : distinct) {
      if (std::abs(lam - seen) <= 1e-12 * lambda_scale) {
        found = true;
        break;
      }
    }
    if (!found) {
      distinct.push_back(lam);
    }
  }

  OracleResult out;
  if (distinct.size() <= m) {
    // exact convergence: interpolate zero at every weighted node
    out.exact_convergence = true;
    out.min_norm = 0.0;
    std::vector<Complex> coeffs{Complex(1.0)};
    for (Complex lam : distinct) {
      std::vector<Complex> next(coeffs.size() + 1, Complex(0.0));
      const Complex f = -1.0 / lam;
      for (std::size_t i = 0; i < coeffs.size(); ++i) {
        next[i] += coeffs[i];
        next[i + 1] += coeffs[i] * f;
      }
      coeffs = std::move(next);
    }
    out.polynomial.coefficients = std::move(coeffs);
    return out;
  }

  // Weighted Vandermonde least squares: minimize ||W e + M alpha|| over the
  // coefficients alpha of z q(z), with W = diag(|d_i|).
  DenseMatrix mmat(n, m);
  DenseVector rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::abs(d[i]);
    rhs[i] = -w;
    Complex power = spectral.lambda[i];
    for (std::size_t c = 0; c < m; ++c) {
      mmat(i, c) = w * power;
      power *= spectral.lambda[i];
    }
  }
  DenseVector alpha = least_squares(mmat, rhs);
  out.min_norm = norm(rhs - matvec(mmat, alpha));
  out.polynomial.coefficients.resize(m + 1);
  out.polynomial.coefficients[0] = 1.0;
  for (std::size_t c = 0; c < m; ++c) {
    out.polynomial.coefficients[c + 1] = alpha[c];
  }
  return out;
}

}  // namespace sublab
