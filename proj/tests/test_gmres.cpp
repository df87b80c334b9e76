#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "sublab/generate.hpp"
#include "sublab/gmres.hpp"
#include "testutil.hpp"

using namespace sublab;

namespace {

DenseMatrix diag(std::vector<Complex> values) {
  DenseMatrix a(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    a(i, i) = values[i];
  }
  return a;
}

SpectralForm diag_spectral(std::vector<Complex> values) {
  SpectralForm s;
  s.v = DenseMatrix::identity(values.size());
  s.lambda = DenseVector(std::move(values));
  s.klass = MatrixClass::normal;
  return s;
}

DenseVector ones(std::size_t n, double scale = 1.0) {
  DenseVector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = scale;
  }
  return v;
}

}  // namespace

TEST_CASE("arnoldi breaks down immediately on the identity") {
  DenseMatrix a = DenseMatrix::identity(4);
  DenseVector v = ones(4, 0.5);
  ArnoldiDecomposition dec = arnoldi(a, v, 3);
  CHECK(dec.steps == 1);
  REQUIRE(dec.breakdown_step.has_value());
  CHECK(*dec.breakdown_step == 1);
  REQUIRE(dec.hessenberg.rows() == 1);
  REQUIRE(dec.hessenberg.cols() == 1);
  CHECK(std::abs(dec.hessenberg(0, 0) - Complex(1.0)) < 1e-15);
}

TEST_CASE("arnoldi breaks down on an exact eigenvector") {
  DenseMatrix a = diag({Complex(1.0), Complex(2.0)});
  DenseVector v(2);
  v[1] = 1.0;
  ArnoldiDecomposition dec = arnoldi(a, v, 1);
  CHECK(dec.steps == 1);
  CHECK(dec.breakdown_step.has_value());
  CHECK(std::abs(dec.hessenberg(0, 0) - Complex(2.0)) < 1e-15);
}

TEST_CASE("arnoldi relation and orthogonality on a seeded normal instance") {
  SystemInstance sys = gen_normal(20, SpectrumSpec::annulus(1.0, 2.0), 31);
  DenseVector v = testutil::random_vector(20, 32);
  ArnoldiDecomposition dec = arnoldi(sys.a, v, 5);
  REQUIRE(!dec.breakdown_step.has_value());
  REQUIRE(dec.steps == 5);
  REQUIRE(dec.basis.cols() == 6);
  REQUIRE(dec.hessenberg.rows() == 6);

  DenseMatrix qj(20, 5);
  for (std::size_t j = 0; j < 5; ++j) {
    std::copy(dec.basis.col(j), dec.basis.col(j) + 20, qj.col(j));
  }
  const double rel_defect = frobenius_norm(sys.a * qj - dec.basis * dec.hessenberg);
  CHECK(rel_defect <= 1e-12 * frobenius_norm(sys.a) * std::sqrt(5.0));

  DenseMatrix gram = hermitian_transpose(dec.basis) * dec.basis;
  CHECK(testutil::matrix_defect(gram, DenseMatrix::identity(6)) <= 1e-12 * 6.0);

  // entries below the first subdiagonal are exactly zero
  for (std::size_t j = 0; j < dec.hessenberg.cols(); ++j) {
    for (std::size_t i = j + 2; i < dec.hessenberg.rows(); ++i) {
      CHECK(dec.hessenberg(i, j) == Complex(0.0));
    }
  }
}

TEST_CASE("arnoldi rejects a zero start vector") {
  DenseMatrix a = DenseMatrix::identity(3);
  CHECK_THROWS_AS(arnoldi(a, DenseVector(3), 2), contract_error);
}

TEST_CASE("gmres_cycle on the identity converges in one inner iteration") {
  DenseMatrix a = DenseMatrix::identity(5);
  DenseVector r = testutil::random_vector(5, 41);
  CycleRecord rec = gmres_cycle(a, r, 3);
  CHECK(rec.breakdown);
  CHECK(rec.exit_norm == 0.0);
  REQUIRE(rec.iteration_norms.size() == 2);
  CHECK(rec.iteration_norms[0] == doctest::Approx(norm(r)));
  CHECK(rec.iteration_norms[1] == 0.0);
  REQUIRE(rec.polynomial.has_value());
  REQUIRE(rec.polynomial->coefficients.size() == 2);
  CHECK(std::abs(rec.polynomial->coefficients[0] - Complex(1.0)) < 1e-14);
  CHECK(std::abs(rec.polynomial->coefficients[1] + Complex(1.0)) < 1e-14);
}

TEST_CASE("gmres_cycle annihilates an eigenvector entry residual") {
  DenseMatrix a = diag({Complex(1.0), Complex(2.0)});
  DenseVector r(2);
  r[0] = 1.0;
  CycleRecord rec = gmres_cycle(a, r, 1);
  CHECK(rec.exit_norm == 0.0);
  CHECK(rec.breakdown);
}

TEST_CASE("gmres_cycle matches the minimization oracle on diag(1,2,3,4)") {
  DenseMatrix a = diag({Complex(1.0), Complex(2.0), Complex(3.0), Complex(4.0)});
  DenseVector r = ones(4, 0.5);
  CycleRecord rec = gmres_cycle(a, r, 2);

  SpectralForm sf = diag_spectral({Complex(1.0), Complex(2.0), Complex(3.0), Complex(4.0)});
  OracleResult oracle = oracle_min_residual(sf, r, 2);
  CHECK(!oracle.exact_convergence);
  CHECK(std::abs(rec.exit_norm - oracle.min_norm) <= 1e-10 * rec.entry_norm);

  REQUIRE(rec.polynomial.has_value());
  REQUIRE(rec.polynomial->coefficients.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(rec.polynomial->coefficients[i] - oracle.polynomial.coefficients[i]) <= 1e-8);
  }
}

TEST_CASE("minimality property: cycle exit equals oracle minimum on 100 seeded instances") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const std::size_t n = 10 + (s % 3) * 10;  // 10, 20, 30
    const std::size_t m = 1 + s % 5;
    SystemInstance sys = gen_normal(n, SpectrumSpec::annulus(1.0, 2.0), 4000 + s);
    CycleRecord rec = gmres_cycle(sys.a, sys.b, m);
    OracleResult oracle = oracle_min_residual(*sys.spectral, sys.b, m);
    CHECK(std::abs(rec.exit_norm - oracle.min_norm) <= 1e-8 * rec.entry_norm);
  }
}

TEST_CASE("full-basis cycle terminates to machine precision") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::size_t n = 8 + 4 * s;
    SystemInstance sys = gen_normal(n, SpectrumSpec::annulus(1.0, 2.0), 500 + s);
    CycleRecord rec = gmres_cycle(sys.a, sys.b, n);
    CHECK(rec.exit_norm <= 1e-10 * rec.entry_norm);
  }
  // also for a generic (nonnormal) seeded matrix
  DenseMatrix a = testutil::random_matrix(20, 20, 510);
  DenseVector r = testutil::random_vector(20, 511);
  CycleRecord rec = gmres_cycle(a, r, 20);
  CHECK(rec.exit_norm <= 1e-10 * rec.entry_norm);
}

TEST_CASE("per-iteration norms are nonincreasing and consistent") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    SystemInstance sys = gen_normal(16, SpectrumSpec::annulus(1.0, 2.0), 600 + s);
    CycleRecord rec = gmres_cycle(sys.a, sys.b, 4);
    REQUIRE(rec.iteration_norms.size() == 5);
    for (std::size_t i = 0; i + 1 < rec.iteration_norms.size(); ++i) {
      CHECK(rec.iteration_norms[i + 1] <= rec.iteration_norms[i] + 1e-12 * rec.entry_norm);
    }
    CHECK(rec.iteration_norms.back() == rec.exit_norm);
    CHECK(rec.exit_norm <= rec.entry_norm * (1.0 + 1e-12));
  }
}

TEST_CASE("exit residual is orthogonal to the shifted Krylov subspace") {
  SystemInstance sys = gen_normal(24, SpectrumSpec::annulus(1.0, 2.0), 71);
  CycleRecord rec = gmres_cycle(sys.a, sys.b, 5);
  ArnoldiDecomposition dec = arnoldi(sys.a, sys.b, 5);
  const double scale = 1e-10 * rec.entry_norm * frobenius_norm(sys.a);
  for (std::size_t j = 0; j < 5; ++j) {
    DenseVector qj(24);
    std::copy(dec.basis.col(j), dec.basis.col(j) + 24, qj.data());
    CHECK(std::abs(dot(matvec(sys.a, qj), rec.exit_residual)) <= scale);
  }
}

TEST_CASE("polynomial consistency: p(A) r reproduces the exit residual") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t m = 1 + s % 5;
    SystemInstance sys = gen_normal(20, SpectrumSpec::annulus(1.0, 2.0), 700 + s);
    CycleRecord rec = gmres_cycle(sys.a, sys.b, m);
    REQUIRE(rec.polynomial.has_value());
    DenseVector recon = apply_polynomial(*rec.polynomial, sys.a, sys.b);
    CHECK(norm(recon - rec.exit_residual) <= 1e-8 * rec.entry_norm);
  }
}

TEST_CASE("extract_polynomial one-step minimizer matches scalar minimization") {
  SystemInstance sys = gen_normal(12, SpectrumSpec::annulus(1.0, 2.0), 81);
  CycleRecord rec = gmres_cycle(sys.a, sys.b, 1);
  REQUIRE(rec.polynomial.has_value());
  DenseVector ar = matvec(sys.a, sys.b);
  const Complex tau = dot(ar, sys.b) / dot(ar, ar);
  CHECK(std::abs(rec.polynomial->coefficients[1] + tau) <= 1e-12);
}

TEST_CASE("extract_polynomial flags a numerically rank-deficient Krylov basis") {
  // eigenvalue pair split by 1e-12: the second Krylov column is nearly
  // parallel to the first, below the change-of-basis diagonal floor but
  // above the Arnoldi breakdown threshold
  DenseMatrix a = diag({Complex(1.0), Complex(1.0 + 1e-12), Complex(1.0 - 1e-12)});
  DenseVector r = ones(3, 1.0 / std::sqrt(3.0));
  ArnoldiDecomposition dec = arnoldi(a, r, 2);
  REQUIRE(dec.steps == 2);
  std::vector<Complex> y(2, Complex(0.0));
  CHECK_THROWS_AS(extract_polynomial(a, r, dec, y), conditioning_error);

  // the cycle itself still succeeds, just without an attached polynomial
  CycleRecord rec = gmres_cycle(a, r, 2);
  CHECK(!rec.polynomial.has_value());
}

TEST_CASE("apply_polynomial trivial cases and explicit-powers oracle") {
  DenseVector v = testutil::random_vector(6, 91);
  ResidualPolynomial unit{{Complex(1.0)}};
  CHECK(norm(apply_polynomial(unit, DenseMatrix::identity(6), v) - v) == 0.0);

  ResidualPolynomial one_minus_z{{Complex(1.0), Complex(-1.0)}};
  CHECK(norm(apply_polynomial(one_minus_z, DenseMatrix::identity(6), v)) == 0.0);

  DenseMatrix a = testutil::random_matrix(6, 6, 92);
  ResidualPolynomial p{{Complex(1.0), Complex(0.5, -0.25), Complex(-0.125, 0.75),
                        Complex(0.0, -1.0)}};
  DenseVector horner = apply_polynomial(p, a, v);
  // explicit powers: sum c_j A^j v
  DenseVector expected = p.coefficients[0] * v;
  DenseVector power = v;
  for (std::size_t jj = 1; jj < p.coefficients.size(); ++jj) {
    power = testutil::reference_matvec(a, power);
    expected = expected + p.coefficients[jj] * power;
  }
  CHECK(norm(horner - expected) <= 1e-12 * norm(expected));
}

TEST_CASE("restarted_gmres on the identity stops after one exact cycle") {
  SystemInstance sys;
  sys.a = DenseMatrix::identity(6);
  sys.b = testutil::random_vector(6, 95);
  sys.x0 = DenseVector(6);
  sys.klass = MatrixClass::normal;
  ConvergenceReport report = restarted_gmres(sys, 3, 10, 0.0);
  REQUIRE(report.cycles.size() == 1);
  CHECK(report.cycles[0].exit_norm == 0.0);
  CHECK(report.stop == StopReason::exact_convergence);
  CHECK(norm(matvec(sys.a, report.solution) - sys.b) <= 1e-14 * norm(sys.b));
}

TEST_CASE("restarted_gmres rejects a zero initial residual") {
  SystemInstance sys = gen_normal(8, SpectrumSpec::annulus(1.0, 2.0), 97);
  sys.x0 = least_squares(sys.a, sys.b);
  CHECK_THROWS_AS(restarted_gmres(sys, 3, 10, 0.0), contract_error);
}

TEST_CASE("restarted_gmres enforces the restart-parameter range") {
  SystemInstance sys = gen_normal(8, SpectrumSpec::annulus(1.0, 2.0), 98);
  CHECK_THROWS_AS(restarted_gmres(sys, 8, 10, 0.0), contract_error);
  CHECK_THROWS_AS(restarted_gmres(sys, 0, 10, 0.0), contract_error);
}

TEST_CASE("restarted run on a 100x100 normal instance is monotone with nondecreasing ratios") {
  SystemInstance sys = gen_normal(100, SpectrumSpec::annulus(1.0, 2.0), 42);
  ConvergenceReport report = restarted_gmres(sys, 5, 30, 0.0);
  REQUIRE(report.cycles.size() >= 2);
  CHECK(report.ratios.size() == report.cycles.size());

  double prev_norm = report.initial_norm;
  for (const CycleRecord& rec : report.cycles) {
    CHECK(rec.exit_norm <= prev_norm * (1.0 + 1e-12));
    prev_norm = rec.exit_norm;
  }
  for (std::size_t k = 0; k < report.ratios.size(); ++k) {
    if (report.residual_norm(k + 1) > 1e-8 * report.initial_norm) {
      CHECK(report.ratios[k] > 0.0);
      CHECK(report.ratios[k] <= 1.0 + 1e-12);
      if (k + 1 < report.ratios.size() &&
          report.residual_norm(k + 2) > 1e-8 * report.initial_norm) {
        CHECK(report.ratios[k] <= report.ratios[k + 1] + 1e-8);
      }
    }
  }
}

TEST_CASE("oracle stagnates on a symmetric plus-minus spectrum") {
  SpectralForm sf = diag_spectral({Complex(1.0), Complex(-1.0)});
  DenseVector r = ones(2, 1.0 / std::sqrt(2.0));
  OracleResult oracle = oracle_min_residual(sf, r, 1);
  CHECK(!oracle.exact_convergence);
  CHECK(oracle.min_norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(oracle.polynomial.coefficients[1]) <= 1e-14);  // best p is constant 1
}

TEST_CASE("oracle flags exact convergence for a single repeated eigenvalue") {
  SpectralForm sf = diag_spectral({Complex(1.0), Complex(1.0), Complex(1.0)});
  DenseVector r = ones(3, 0.7);
  OracleResult oracle = oracle_min_residual(sf, r, 1);
  CHECK(oracle.exact_convergence);
  CHECK(oracle.min_norm == 0.0);
  REQUIRE(oracle.polynomial.coefficients.size() == 2);
  CHECK(std::abs(oracle.polynomial.coefficients[1] + Complex(1.0)) <= 1e-14);
}

TEST_CASE("oracle rejects a nonnormal spectral form") {
  SpectralForm sf = diag_spectral({Complex(1.0), Complex(2.0)});
  sf.klass = MatrixClass::diagonalizable_nonnormal;
  CHECK_THROWS_AS(oracle_min_residual(sf, ones(2), 1), contract_error);
}
