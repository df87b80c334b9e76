#pragma once

#include <optional>
#include <vector>

#include "sublab/gmres.hpp"
#include "sublab/system.hpp"

namespace sublab {

/// Default absolute tolerance on residual-norm ratios; double precision keeps
/// roughly eight digits through the cycle least squares.
inline constexpr double kRatioTolerance = 1e-8;

/// Default usable-cycle floor as a fraction of ||r_0||.
inline constexpr double kDefaultFloor = 1e-8;

/// Explicit Krylov matrix K = [r, A r, ..., A^m r] with optional spectral
/// factors K = V diag(d) Z.
struct KrylovBundle {
  DenseMatrix k;
  DenseVector r;
  std::size_t numerical_rank = 0;
  std::optional<DenseMatrix> v;
  std::optional<DenseVector> d;
  std::optional<DenseMatrix> z;
};

/// Builds the Krylov columns by repeated products and records the numerical
/// rank from the QR diagonal of the column-scaled matrix.
KrylovBundle build_krylov_matrix(const DenseMatrix& a, const DenseVector& r, std::size_t m);

/// Attaches V, d, Z factors from a spectral form (d = V^H r for a unitary
/// basis, d = V^{-1} r otherwise, solved by QR rather than inversion).
void attach_spectral_factors(KrylovBundle& bundle, const SpectralForm& spectral);

struct Lemma1Result {
  double defect = 0.0;            ///< || (K^+)^H e_1 - r_exit / ||r_exit||^2 || * ||r_exit||
  DenseVector reconstructed;      ///< r_exit rebuilt from the pseudoinverse column
};

/// Pseudoinverse identity: the first column of (K^+)^H is the cycle exit
/// residual scaled by 1/||r_exit||^2.
Lemma1Result lemma1_check(const KrylovBundle& bundle, const DenseVector& r_exit);

/// Spectral factorization defect ||K - V diag(d) Z|| / ||K||, with K built by
/// repeated products and the factors assembled independently.
double lemma2_check(const SystemInstance& sys, const DenseVector& r, std::size_t m);

struct Lemma3Result {
  double norm_a = 0.0;                ///< ||r_m|| after a cycle on A
  double norm_ah = 0.0;               ///< ||r_m|| after a cycle on A^H
  double conjugation_defect = 0.0;    ///< coefficient distance of conj(p_A) and p_{A^H}
};

/// Runs one cycle on A and on A^H from the same residual; for a normal matrix
/// the exit norms agree and the polynomials conjugate into each other.
Lemma3Result lemma3_check(const DenseMatrix& a, MatrixClass klass, const DenseVector& r0,
                          std::size_t m);

/// Verdicts for the ratio inequalities; filled by theorem1_check (alpha = 1,
/// betas empty) and lemma4_check.
struct BoundReport {
  std::vector<std::size_t> cycle_indices;  ///< 1-based cycle index of each usable ratio
  std::vector<double> ratios;
  std::vector<double> slacks;              ///< rhs - lhs per consecutive pair; >= -tol passes
  std::vector<bool> verdicts;
  std::vector<double> w_norms;
  std::vector<double> conjugate_norms;
  double alpha = 1.0;
  std::vector<double> betas;
  bool pass = true;

  double worst_slack() const;
};

/// Nondecreasing-ratio check over cycles above the floor.
BoundReport theorem1_check(const ConvergenceReport& report, double floor,
                           double tol_ratio = kRatioTolerance);

struct UndersysResult {
  double e1_defect = 0.0;
  double w_norm = 0.0;
  double pythagoras_defect = 0.0;
};

/// Null-space decomposition of a residual against the conjugate-system Krylov
/// matrix: e_1 = K^H(A^H, r_cur) r_prev / ||r_cur||^2, the split of r_prev
/// into pseudoinverse part plus w, and the norm identity between the pieces.
UndersysResult undersys_check(const DenseMatrix& a, const DenseVector& r_prev,
                              const DenseVector& r_cur, std::size_t m);

/// Geometric-decay prediction ||r_{k+1}|| = ||r_1|| (||r_1||/||r_0||)^k for
/// full-width restarts (m = n-1); returns the largest relative error over
/// cycles above the floor.
double corollary_n1_check(const ConvergenceReport& report, double floor = kDefaultFloor);

struct AlternatingResult {
  double max_collinearity_defect = 0.0;
  std::vector<double> alphas;
};

/// Alternating-direction check r_{k+1} = alpha_k r_{k-1} with
/// alpha_k = ||r_{k+1}||^2 / ||r_k||^2 for Hermitian or skew-Hermitian runs
/// at m = n-1. Requires stored residual vectors.
AlternatingResult corollary_alt_check(const ConvergenceReport& report,
                                      double floor = kDefaultFloor);

/// Nonnormal ratio bound rho_k <= alpha (||r_{k+1}|| + beta_k) / ||r_k|| with
/// alpha = 1/sigma_min(V)^2 and beta_k = ||p_k(A)(I - V V^H) r_k||.
BoundReport lemma4_check(const SystemInstance& sys, const ConvergenceReport& report,
                         double floor = kDefaultFloor, double tol = kRatioTolerance);

/// Smallest value of log||r_{k+1}|| - 2 log||r_k|| + log||r_{k-1}|| over
/// usable cycles; nonnegative (up to tolerance) iff the log-curve is convex.
double log_convexity_margin(const ConvergenceReport& report, double floor = kDefaultFloor);

}  // namespace sublab
