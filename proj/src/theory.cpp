#include "sublab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace sublab {

namespace {

void require(bool ok, const char* message) {
  if (!ok) {
    throw contract_error(message);
  }
}

std::vector<double> column_norms(const DenseMatrix& k) {
  std::vector<double> s(k.cols());
  for (std::size_t j = 0; j < k.cols(); ++j) {
    double acc = 0.0;
    const Complex* col = k.col(j);
    for (std::size_t i = 0; i < k.rows(); ++i) {
      acc += std::norm(col[i]);
    }
    s[j] = std::sqrt(acc);
  }
  return s;
}

DenseMatrix scaled_columns(const DenseMatrix& k, const std::vector<double>& s) {
  DenseMatrix out(k.rows(), k.cols());
  for (std::size_t j = 0; j < k.cols(); ++j) {
    const double f = s[j] > 0.0 ? 1.0 / s[j] : 0.0;
    for (std::size_t i = 0; i < k.rows(); ++i) {
      out(i, j) = k(i, j) * f;
    }
  }
  return out;
}

// First column of (K^+)^H with the pseudoinverse taken on the column-scaled
// matrix and the scaling undone analytically afterwards.
DenseVector pinv_adjoint_e1(const DenseMatrix& k) {
  const std::vector<double> s = column_norms(k);
  if (s[0] == 0.0) {
    throw conditioning_error("pseudoinverse identity: zero leading Krylov column");
  }
  DenseMatrix pinv_scaled = pseudoinverse(scaled_columns(k, s));
  DenseVector v(k.rows());
  for (std::size_t i = 0; i < k.rows(); ++i) {
    v[i] = std::conj(pinv_scaled(0, i)) / s[0];
  }
  return v;
}

// Usable cycles form a prefix because cycle norms are nonincreasing.
std::size_t usable_cycles(const ConvergenceReport& report, double floor) {
  const double cut = floor * report.initial_norm;
  std::size_t count = 0;
  while (count < report.cycles.size() && report.cycles[count].exit_norm > cut) {
    ++count;
  }
  return count;
}

}  // namespace

double BoundReport::worst_slack() const {
  double worst = std::numeric_limits<double>::infinity();
  for (double s : slacks) {
    worst = std::min(worst, s);
  }
  return worst;
}

KrylovBundle build_krylov_matrix(const DenseMatrix& a, const DenseVector& r, std::size_t m) {
  require(a.rows() == a.cols(), "build_krylov_matrix: matrix must be square");
  require(r.dim() == a.rows(), "build_krylov_matrix: dimension mismatch");
  require(norm(r) > 0.0, "build_krylov_matrix: residual must be nonzero");
  require(m >= 1, "build_krylov_matrix: need at least one power");

  const std::size_t n = a.rows();
  KrylovBundle bundle;
  bundle.r = r;
  bundle.k = DenseMatrix(n, m + 1);
  DenseVector col = r;
  for (std::size_t j = 0; j <= m; ++j) {
    std::copy(col.entries().begin(), col.entries().end(), bundle.k.col(j));
    if (j < m) {
      col = matvec(a, col);
    }
  }

  const std::vector<double> s = column_norms(bundle.k);
  auto [q, rfac] = householder_qr(scaled_columns(bundle.k, s));
  double max_diag = 0.0;
  for (std::size_t j = 0; j <= m; ++j) {
    max_diag = std::max(max_diag, std::abs(rfac(j, j)));
  }
  bundle.numerical_rank = 0;
  for (std::size_t j = 0; j <= m; ++j) {
    if (std::abs(rfac(j, j)) > 1e-14 * max_diag) {
      ++bundle.numerical_rank;
    }
  }
  return bundle;
}

void attach_spectral_factors(KrylovBundle& bundle, const SpectralForm& spectral) {
  const std::size_t m = bundle.k.cols() - 1;
  bundle.v = spectral.v;
  if (is_normal_class(spectral.klass)) {
    bundle.d = matvec(hermitian_transpose(spectral.v), bundle.r);
  } else {
    bundle.d = least_squares(spectral.v, bundle.r);
  }
  bundle.z = vandermonde(spectral.lambda, m);
}

Lemma1Result lemma1_check(const KrylovBundle& bundle, const DenseVector& r_exit) {
  if (bundle.numerical_rank < bundle.k.cols()) {
    throw conditioning_error("lemma1_check: Krylov matrix is numerically rank deficient");
  }
  const double exit_norm = norm(r_exit);
  require(exit_norm > 0.0, "lemma1_check: exit residual must be nonzero");

  DenseVector v = pinv_adjoint_e1(bundle.k);
  DenseVector expected = (1.0 / (exit_norm * exit_norm)) * r_exit;

  Lemma1Result out;
  out.defect = norm(v - expected) * exit_norm;
  const double vsq = norm(v) * norm(v);
  out.reconstructed = (1.0 / vsq) * v;
  return out;
}

double lemma2_check(const SystemInstance& sys, const DenseVector& r, std::size_t m) {
  require(sys.spectral.has_value(), "lemma2_check: instance carries no spectral form");
  KrylovBundle bundle = build_krylov_matrix(sys.a, r, m);
  attach_spectral_factors(bundle, *sys.spectral);

  const DenseMatrix& z = *bundle.z;
  const DenseVector& d = *bundle.d;
  DenseMatrix dz(z.rows(), z.cols());
  for (std::size_t j = 0; j < z.cols(); ++j) {
    for (std::size_t i = 0; i < z.rows(); ++i) {
      dz(i, j) = d[i] * z(i, j);
    }
  }
  const DenseMatrix vdz = *bundle.v * dz;
  return frobenius_norm(bundle.k - vdz) / frobenius_norm(bundle.k);
}

Lemma3Result lemma3_check(const DenseMatrix& a, MatrixClass klass, const DenseVector& r0,
                          std::size_t m) {
  require(is_normal_class(klass), "lemma3_check: requires a normal-class matrix");

  CycleRecord run_a = gmres_cycle(a, r0, m);
  CycleRecord run_ah = gmres_cycle(hermitian_transpose(a), r0, m);

  Lemma3Result out;
  out.norm_a = run_a.exit_norm;
  out.norm_ah = run_ah.exit_norm;

  if (!run_a.polynomial || !run_ah.polynomial) {
    throw conditioning_error("lemma3_check: residual polynomials unavailable at this degree");
  }
  const ResidualPolynomial conj_a = conjugate_coefficients(*run_a.polynomial);
  const std::vector<Complex>& pa = conj_a.coefficients;
  const std::vector<Complex>& ph = run_ah.polynomial->coefficients;
  require(pa.size() == ph.size(), "lemma3_check: polynomial degrees disagree");
  double defect = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    defect += std::norm(pa[i] - ph[i]);
  }
  out.conjugation_defect = std::sqrt(defect);
  return out;
}

BoundReport theorem1_check(const ConvergenceReport& report, double floor, double tol_ratio) {
  require(is_normal_class(report.klass), "theorem1_check: requires a normal-class run");
  const std::size_t usable = usable_cycles(report, floor);
  if (usable < 2) {
    throw insufficient_data_error("theorem1_check: need at least two cycles above the floor");
  }

  BoundReport out;
  for (std::size_t k = 0; k < usable; ++k) {
    out.cycle_indices.push_back(k + 1);
    out.ratios.push_back(report.ratios[k]);
  }
  for (std::size_t k = 0; k + 1 < usable; ++k) {
    const double slack = out.ratios[k + 1] - out.ratios[k];
    out.slacks.push_back(slack);
    out.verdicts.push_back(slack >= -tol_ratio);
    out.pass = out.pass && out.verdicts.back();
  }
  return out;
}

UndersysResult undersys_check(const DenseMatrix& a, const DenseVector& r_prev,
                              const DenseVector& r_cur, std::size_t m) {
  require(norm(r_prev) > 0.0 && norm(r_cur) > 0.0,
          "undersys_check: residual vectors must be nonzero");
  KrylovBundle bundle = build_krylov_matrix(hermitian_transpose(a), r_cur, m);
  if (bundle.numerical_rank < bundle.k.cols()) {
    throw conditioning_error("undersys_check: Krylov matrix is numerically rank deficient");
  }
  const double cur_sq = norm(r_cur) * norm(r_cur);

  UndersysResult out;
  // e_1 identity: component i of K^H r_prev / ||r_cur||^2
  double defect = 0.0;
  for (std::size_t j = 0; j < bundle.k.cols(); ++j) {
    DenseVector col(bundle.k.rows());
    std::copy(bundle.k.col(j), bundle.k.col(j) + bundle.k.rows(), col.data());
    const Complex e = dot(col, r_prev) / cur_sq;
    const Complex target = j == 0 ? Complex(1.0) : Complex(0.0);
    defect += std::norm(e - target);
  }
  out.e1_defect = std::sqrt(defect);

  // null-space split r_prev = ||r_cur||^2 (K^H)^+ e_1 + w
  DenseVector v = pinv_adjoint_e1(bundle.k);
  DenseVector w = r_prev - Complex(cur_sq) * v;
  out.w_norm = norm(w);

  const double lhs = norm(r_prev) * norm(r_prev);
  const double rhs = cur_sq * cur_sq * norm(v) * norm(v) + out.w_norm * out.w_norm;
  out.pythagoras_defect = std::abs(lhs - rhs) / lhs;
  return out;
}

double corollary_n1_check(const ConvergenceReport& report, double floor) {
  require(is_normal_class(report.klass), "corollary_n1_check: requires a normal-class run");
  require(report.m + 1 == report.n, "corollary_n1_check: requires m = n-1");
  const std::size_t usable = usable_cycles(report, floor);
  if (usable < 3) {
    throw insufficient_data_error("corollary_n1_check: need at least three cycles above the floor");
  }
  const double r0 = report.initial_norm;
  const double r1 = report.cycles[0].exit_norm;
  const double rho = r1 / r0;

  double worst = 0.0;
  double predicted = r1;
  for (std::size_t k = 2; k <= usable; ++k) {
    predicted *= rho;  // ||r_k|| = ||r_1|| (||r_1||/||r_0||)^{k-1}
    const double measured = report.cycles[k - 1].exit_norm;
    worst = std::max(worst, std::abs(predicted - measured) / measured);
  }
  return worst;
}

AlternatingResult corollary_alt_check(const ConvergenceReport& report, double floor) {
  require(report.klass == MatrixClass::hermitian || report.klass == MatrixClass::skew_hermitian,
          "corollary_alt_check: requires a Hermitian or skew-Hermitian run");
  require(report.m + 1 == report.n, "corollary_alt_check: requires m = n-1");
  require(!report.initial_residual.empty(),
          "corollary_alt_check: run was made without stored residual vectors");

  const std::size_t usable = usable_cycles(report, floor);
  auto vector_at = [&](std::size_t k) -> const DenseVector& {
    return k == 0 ? report.initial_residual : report.cycles[k - 1].exit_residual;
  };

  AlternatingResult out;
  // pairs (k-1, k+1) with cycle k+1 still above the floor
  for (std::size_t k = 1; k + 1 <= usable; ++k) {
    const DenseVector& prev = vector_at(k - 1);
    const DenseVector& next = vector_at(k + 1);
    require(!prev.empty() && !next.empty(),
            "corollary_alt_check: run was made without stored residual vectors");
    const double nk = report.residual_norm(k);
    const double nk1 = report.residual_norm(k + 1);
    const double alpha = (nk1 * nk1) / (nk * nk);
    out.alphas.push_back(alpha);
    const double defect = norm(next - Complex(alpha) * prev) / nk1;
    out.max_collinearity_defect = std::max(out.max_collinearity_defect, defect);
  }
  return out;
}

BoundReport lemma4_check(const SystemInstance& sys, const ConvergenceReport& report, double floor,
                         double tol) {
  require(sys.spectral.has_value(), "lemma4_check: instance carries no spectral form");
  const SpectralForm& sf = *sys.spectral;

  SvdResult vsvd = svd(sf.v);
  const double sigma_min = vsvd.singular_values.back();
  if (sigma_min <= 0.0) {
    throw conditioning_error("lemma4_check: eigenvector basis is singular");
  }

  BoundReport out;
  out.alpha = 1.0 / (sigma_min * sigma_min);

  const std::size_t usable = usable_cycles(report, floor);
  const DenseMatrix vh = hermitian_transpose(sf.v);
  for (std::size_t k = 1; k + 1 <= usable; ++k) {
    const CycleRecord& next_cycle = report.cycles[k];  // cycle k+1, started from r_k
    require(!report.cycles[k - 1].exit_residual.empty(),
            "lemma4_check: run was made without stored residual vectors");
    require(next_cycle.polynomial.has_value(),
            "lemma4_check: run was made without residual polynomials");
    const DenseVector& rk = report.cycles[k - 1].exit_residual;

    DenseVector off = rk - matvec(sf.v, matvec(vh, rk));
    const double beta = norm(apply_polynomial(*next_cycle.polynomial, sys.a, off));

    const double lhs = report.residual_norm(k) / report.residual_norm(k - 1);
    const double rhs = out.alpha * (report.residual_norm(k + 1) + beta) / report.residual_norm(k);
    out.cycle_indices.push_back(k);
    out.ratios.push_back(lhs);
    out.betas.push_back(beta);
    out.slacks.push_back(rhs - lhs);
    out.verdicts.push_back(rhs - lhs >= -tol);
    out.pass = out.pass && out.verdicts.back();
  }
  return out;
}

double log_convexity_margin(const ConvergenceReport& report, double floor) {
  const std::size_t usable = usable_cycles(report, floor);
  if (usable < 2) {
    throw insufficient_data_error("log_convexity_margin: need at least two cycles above the floor");
  }
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < usable; ++k) {
    const double a = std::log(report.residual_norm(k - 1));
    const double b = std::log(report.residual_norm(k));
    const double c = std::log(report.residual_norm(k + 1));
    margin = std::min(margin, c - 2.0 * b + a);
  }
  return margin;
}

}  // namespace sublab
