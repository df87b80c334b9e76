#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sublab/system.hpp"

namespace sublab {

/// Largest degree at which residual polynomials are re-expressed in the
/// monomial basis; beyond this the Krylov-to-monomial change of basis is too
/// ill-conditioned to trust.
inline constexpr std::size_t kPolynomialDegreeCap = 12;

/// Cycle norms below this fraction of ||r_0|| count as exact convergence and
/// are excluded from ratio analysis.
inline constexpr double kExactConvergenceFloor = 1e-13;

/// Orthonormal Krylov basis Q and upper Hessenberg H with A Q_j = Q H.
/// Without breakdown the basis is n x (steps+1) and H is (steps+1) x steps;
/// on breakdown at step j the Krylov space is invariant, the basis is n x j
/// and H is j x j.
struct ArnoldiDecomposition {
  DenseMatrix basis;
  DenseMatrix hessenberg;
  std::size_t steps = 0;
  std::optional<std::size_t> breakdown_step;
};

/// Modified Gram-Schmidt Arnoldi with one full reorthogonalization pass.
/// Breakdown is declared when a candidate norm falls below 1e-14 ||A||_F.
ArnoldiDecomposition arnoldi(const DenseMatrix& a, const DenseVector& v, std::size_t m);

/// Coefficients c_0..c_deg of a residual polynomial, normalized so c_0 = 1.
struct ResidualPolynomial {
  std::vector<Complex> coefficients;

  std::size_t degree() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }
};

ResidualPolynomial conjugate_coefficients(const ResidualPolynomial& p);

/// What one restart cycle measured.
struct CycleRecord {
  std::size_t index = 0;  ///< 1-based cycle number, assigned by the driver
  double entry_norm = 0.0;
  double exit_norm = 0.0;
  /// Least-squares residual estimates per inner iteration; element 0 is the
  /// entry norm and the last element equals exit_norm.
  std::vector<double> iteration_norms;
  std::optional<ResidualPolynomial> polynomial;
  DenseVector exit_residual;
  bool breakdown = false;  ///< exact convergence inside the cycle
};

enum class StopReason { tolerance_reached, max_cycles, exact_convergence };

const char* to_string(StopReason reason);

/// Restarted-run record: per-cycle data plus the ratio sequence
/// rho_k = ||r_k|| / ||r_{k-1}||.
struct ConvergenceReport {
  std::size_t n = 0;
  std::size_t m = 0;
  MatrixClass klass = MatrixClass::general;
  std::uint64_t seed = 0;
  double initial_norm = 0.0;
  DenseVector initial_residual;
  std::vector<CycleRecord> cycles;
  std::vector<double> ratios;
  StopReason stop = StopReason::max_cycles;
  DenseVector solution;

  /// ||r_k||: k = 0 is the initial residual norm.
  double residual_norm(std::size_t k) const {
    return k == 0 ? initial_norm : cycles[k - 1].exit_norm;
  }
};

struct RunOptions {
  bool store_residual_vectors = true;  ///< needed by the alternating/null-space checks
  bool extract_polynomials = true;     ///< skipped above kPolynomialDegreeCap regardless
};

/// One minimal-residual cycle: Arnoldi + Hessenberg least squares via Givens
/// rotations. Accepts 1 <= m <= n; the restarted driver restricts m to n-1.
CycleRecord gmres_cycle(const DenseMatrix& a, const DenseVector& r_entry, std::size_t m,
                        const RunOptions& options = {});

/// Chains cycles, each exit residual feeding the next cycle, until
/// ||r_k|| <= rtol ||r_0||, exact convergence, or max_cycles.
ConvergenceReport restarted_gmres(const SystemInstance& sys, std::size_t m,
                                  std::size_t max_cycles, double rtol,
                                  const RunOptions& options = {});

/// Re-expresses the Arnoldi-basis correction in the monomial Krylov basis to
/// obtain p(z) = 1 - z q(z) with p(A) r_entry equal to the exit residual.
/// The inner triangular solve runs in extended precision against the
/// column-scaled explicit Krylov matrix.
ResidualPolynomial extract_polynomial(const DenseMatrix& a, const DenseVector& r_entry,
                                      const ArnoldiDecomposition& dec,
                                      const std::vector<Complex>& ls_solution);

/// Horner evaluation of p(A) v using only matrix-vector products.
DenseVector apply_polynomial(const ResidualPolynomial& p, const DenseMatrix& a,
                             const DenseVector& v);

struct OracleResult {
  double min_norm = 0.0;
  ResidualPolynomial polynomial;
  bool exact_convergence = false;
};

/// Independent minimal-residual oracle for unitarily diagonalizable systems:
/// minimizes sum_i |p(lambda_i)|^2 |d_i|^2 over p(0) = 1 through a weighted
/// Vandermonde least-squares problem, with no Arnoldi involved.
OracleResult oracle_min_residual(const SpectralForm& spectral, const DenseVector& r_entry,
                                 std::size_t m);

}  // namespace sublab
