#include "sublab/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>

namespace sublab {

namespace {

// Relative cutoff on the R diagonal below which a matrix is treated as
// numerically rank deficient.
constexpr double kRankTolerance = 1e-14;

constexpr int kMaxJacobiSweeps = 60;

void require(bool ok, const char* message) {
  if (!ok) {
    throw contract_error(message);
  }
}

bool finite(Complex z) noexcept {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols) {
  require(rows > 0 && cols > 0, "DenseMatrix: dimensions must be positive");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  require(rows > 0 && cols > 0, "DenseMatrix: dimensions must be positive");
  require(entries_.size() == rows * cols, "DenseMatrix: entry count must equal rows*cols");
  require(is_finite(), "DenseMatrix: entries must be finite");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 1.0;
  }
  return a;
}

bool DenseMatrix::is_finite() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(), finite);
}

DenseVector::DenseVector(std::vector<Complex> entries) : entries_(std::move(entries)) {
  require(is_finite(), "DenseVector: entries must be finite");
}

bool DenseVector::is_finite() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(), finite);
}

double norm(const DenseVector& x) {
  double s = 0.0;
  for (const Complex& v : x.entries()) {
    s += std::norm(v);
  }
  return std::sqrt(s);
}

Complex dot(const DenseVector& x, const DenseVector& y) {
  require(x.dim() == y.dim(), "dot: dimension mismatch");
  Complex s = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    s += std::conj(x[i]) * y[i];
  }
  return s;
}

double frobenius_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (const Complex& v : a.entries()) {
    s += std::norm(v);
  }
  return std::sqrt(s);
}

DenseVector operator+(const DenseVector& x, const DenseVector& y) {
  require(x.dim() == y.dim(), "vector +: dimension mismatch");
  DenseVector z(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    z[i] = x[i] + y[i];
  }
  return z;
}

DenseVector operator-(const DenseVector& x, const DenseVector& y) {
  require(x.dim() == y.dim(), "vector -: dimension mismatch");
  DenseVector z(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    z[i] = x[i] - y[i];
  }
  return z;
}

DenseVector operator*(Complex s, const DenseVector& x) {
  DenseVector z(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    z[i] = s * x[i];
  }
  return z;
}

DenseVector operator*(double s, const DenseVector& x) { return Complex(s, 0.0) * x; }

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix +: shape mismatch");
  DenseMatrix c(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      c(i, j) = a(i, j) + b(i, j);
    }
  }
  return c;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix -: shape mismatch");
  DenseMatrix c(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      c(i, j) = a(i, j) - b(i, j);
    }
  }
  return c;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matrix *: inner dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex bkj = b(k, j);
      if (bkj == Complex(0.0)) {
        continue;
      }
      const Complex* acol = a.col(k);
      Complex* ccol = c.col(j);
      for (std::size_t i = 0; i < a.rows(); ++i) {
        ccol[i] += acol[i] * bkj;
      }
    }
  }
  return c;
}

DenseMatrix operator*(Complex s, const DenseMatrix& a) {
  DenseMatrix c(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      c(i, j) = s * a(i, j);
    }
  }
  return c;
}

DenseVector matvec(const DenseMatrix& a, const DenseVector& x) {
  require(a.cols() == x.dim(), "matvec: dimension mismatch");
  DenseVector y(a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const Complex xj = x[j];
    if (xj == Complex(0.0)) {
      continue;
    }
    const Complex* acol = a.col(j);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      y[i] += acol[i] * xj;
    }
  }
  return y;
}

DenseMatrix hermitian_transpose(const DenseMatrix& a) {
  DenseMatrix b(a.cols(), a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      b(j, i) = std::conj(a(i, j));
    }
  }
  return b;
}

namespace {

// Compact Householder factorization. Reflectors are unit vectors v_j acting
// on rows j..rows-1 as I - 2 v v^H; an empty v_j is the identity.
struct HouseholderFactors {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<Complex>> reflectors;
  DenseMatrix r;  // cols x cols upper triangle
  double max_abs_diag = 0.0;
  double min_abs_diag = 0.0;

  std::size_t numerical_rank() const {
    std::size_t rank = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (std::abs(r(j, j)) > kRankTolerance * max_abs_diag) {
        ++rank;
      }
    }
    return rank;
  }

  // x := Q^H x
  void apply_qh(std::span<Complex> x) const {
    for (std::size_t j = 0; j < cols; ++j) {
      const auto& v = reflectors[j];
      if (v.empty()) {
        continue;
      }
      Complex s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        s += std::conj(v[i]) * x[j + i];
      }
      s *= 2.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        x[j + i] -= s * v[i];
      }
    }
  }

  // x := Q x
  void apply_q(std::span<Complex> x) const {
    for (std::size_t jj = cols; jj-- > 0;) {
      const auto& v = reflectors[jj];
      if (v.empty()) {
        continue;
      }
      Complex s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        s += std::conj(v[i]) * x[jj + i];
      }
      s *= 2.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        x[jj + i] -= s * v[i];
      }
    }
  }

  DenseMatrix thin_q() const {
    DenseMatrix q(rows, cols);
    std::vector<Complex> work(rows);
    for (std::size_t j = 0; j < cols; ++j) {
      std::fill(work.begin(), work.end(), Complex(0.0));
      work[j] = 1.0;
      apply_q(work);
      std::copy(work.begin(), work.end(), q.col(j));
    }
    return q;
  }

  DenseMatrix full_q() const {
    DenseMatrix q(rows, rows);
    std::vector<Complex> work(rows);
    for (std::size_t j = 0; j < rows; ++j) {
      std::fill(work.begin(), work.end(), Complex(0.0));
      work[j] = 1.0;
      apply_q(work);
      std::copy(work.begin(), work.end(), q.col(j));
    }
    return q;
  }
};

HouseholderFactors householder_factor(const DenseMatrix& a) {
  require(a.rows() >= a.cols(), "householder_qr: require rows >= cols");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();

  DenseMatrix work = a;
  HouseholderFactors f;
  f.rows = m;
  f.cols = n;
  f.reflectors.resize(n);

  for (std::size_t j = 0; j < n; ++j) {
    double colnorm = 0.0;
    for (std::size_t i = j; i < m; ++i) {
      colnorm += std::norm(work(i, j));
    }
    colnorm = std::sqrt(colnorm);
    if (colnorm == 0.0) {
      continue;  // identity reflector, R(j,j) stays 0
    }
    const Complex alpha = work(j, j);
    const double aabs = std::abs(alpha);
    // Phase choice sign(alpha) avoids cancellation in v_0.
    const Complex phase = aabs > 0.0 ? alpha / aabs : Complex(1.0);

    std::vector<Complex> v(m - j);
    for (std::size_t i = j; i < m; ++i) {
      v[i - j] = work(i, j);
    }
    v[0] += phase * colnorm;
    double vnorm = 0.0;
    for (const Complex& z : v) {
      vnorm += std::norm(z);
    }
    vnorm = std::sqrt(vnorm);
    for (Complex& z : v) {
      z /= vnorm;
    }

    for (std::size_t c = j; c < n; ++c) {
      Complex s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        s += std::conj(v[i]) * work(j + i, c);
      }
      s *= 2.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        work(j + i, c) -= s * v[i];
      }
    }
    work(j, j) = -phase * colnorm;
    for (std::size_t i = j + 1; i < m; ++i) {
      work(i, j) = 0.0;
    }
    f.reflectors[j] = std::move(v);
  }

  f.r = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      f.r(i, j) = work(i, j);
    }
  }
  double maxd = 0.0;
  double mind = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const double d = std::abs(f.r(j, j));
    maxd = std::max(maxd, d);
    mind = std::min(mind, d);
  }
  f.max_abs_diag = maxd;
  f.min_abs_diag = mind;
  return f;
}

// Solve R y = b for upper-triangular R (diagonal assumed nonzero by caller).
std::vector<Complex> back_substitute(const DenseMatrix& r, std::span<const Complex> b) {
  const std::size_t n = r.cols();
  std::vector<Complex> y(n);
  for (std::size_t ii = n; ii-- > 0;) {
    Complex s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) {
      s -= r(ii, k) * y[k];
    }
    y[ii] = s / r(ii, ii);
  }
  return y;
}

void require_full_rank(const HouseholderFactors& f, const char* who) {
  if (f.max_abs_diag == 0.0 || f.min_abs_diag <= kRankTolerance * f.max_abs_diag) {
    throw rank_deficiency_error(std::string(who) + ": matrix is numerically rank deficient",
                                f.numerical_rank());
  }
}

}  // namespace

QrFactors householder_qr(const DenseMatrix& a) {
  HouseholderFactors f = householder_factor(a);
  return {f.thin_q(), std::move(f.r)};
}

DenseVector least_squares(const DenseMatrix& a, const DenseVector& b) {
  require(a.rows() == b.dim(), "least_squares: dimension mismatch");
  HouseholderFactors f = householder_factor(a);
  require_full_rank(f, "least_squares");

  std::vector<Complex> rhs(b.entries());
  f.apply_qh(rhs);
  std::vector<Complex> y = back_substitute(f.r, std::span<const Complex>(rhs.data(), a.cols()));
  return DenseVector(std::move(y));
}

DenseMatrix pseudoinverse(const DenseMatrix& k) {
  require(k.rows() >= k.cols(), "pseudoinverse: require rows >= cols");
  HouseholderFactors f = householder_factor(k);
  require_full_rank(f, "pseudoinverse");

  const std::size_t m = k.rows();
  const std::size_t n = k.cols();
  DenseMatrix pinv(n, m);
  std::vector<Complex> work(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(work.begin(), work.end(), Complex(0.0));
    work[i] = 1.0;
    f.apply_qh(work);
    std::vector<Complex> y = back_substitute(f.r, std::span<const Complex>(work.data(), n));
    for (std::size_t row = 0; row < n; ++row) {
      pinv(row, i) = y[row];
    }
  }
  return pinv;
}

namespace {

double column_sqnorm(const DenseMatrix& b, std::size_t j) {
  double s = 0.0;
  const Complex* c = b.col(j);
  for (std::size_t i = 0; i < b.rows(); ++i) {
    s += std::norm(c[i]);
  }
  return s;
}

}  // namespace

SvdResult svd(const DenseMatrix& a) {
  if (a.rows() < a.cols()) {
    SvdResult s = svd(hermitian_transpose(a));
    return {std::move(s.w), std::move(s.singular_values), std::move(s.u)};
  }
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();

  DenseMatrix b = a;
  DenseMatrix w = DenseMatrix::identity(n);

  // One-sided Jacobi: rotate column pairs until the column Gram matrix is
  // numerically diagonal.
  constexpr double kPairTol = 1e-15;
  bool converged = n < 2;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double app = column_sqnorm(b, p);
        const double aqq = column_sqnorm(b, q);
        Complex apq = 0.0;
        {
          const Complex* cp = b.col(p);
          const Complex* cq = b.col(q);
          for (std::size_t i = 0; i < m; ++i) {
            apq += std::conj(cp[i]) * cq[i];
          }
        }
        const double g = std::abs(apq);
        if (g <= kPairTol * std::sqrt(app * aqq) || app == 0.0 || aqq == 0.0) {
          continue;
        }
        converged = false;

        // Absorb the Gram phase into column q, then apply the real Jacobi
        // rotation that annihilates the (p,q) Gram entry.
        const Complex phase = std::conj(apq / g);
        for (std::size_t i = 0; i < m; ++i) {
          b(i, q) *= phase;
        }
        for (std::size_t i = 0; i < n; ++i) {
          w(i, q) *= phase;
        }
        const double tau = (aqq - app) / (2.0 * g);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t i = 0; i < m; ++i) {
          const Complex bp = b(i, p);
          const Complex bq = b(i, q);
          b(i, p) = c * bp - s * bq;
          b(i, q) = s * bp + c * bq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const Complex wp = w(i, p);
          const Complex wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
      }
    }
  }
  if (!converged) {
    throw numerical_error("svd: one-sided Jacobi exceeded 60 sweeps");
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    sigma[j] = std::sqrt(column_sqnorm(b, j));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  DenseMatrix bs(m, n);
  DenseMatrix ws(n, n);
  std::vector<double> sig(n);
  for (std::size_t j = 0; j < n; ++j) {
    sig[j] = sigma[order[j]];
    std::copy(b.col(order[j]), b.col(order[j]) + m, bs.col(j));
    std::copy(w.col(order[j]), w.col(order[j]) + n, ws.col(j));
  }

  const double smax = sig.empty() ? 0.0 : sig[0];
  const double zero_tol =
      smax * static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon();
  std::size_t rank = 0;
  while (rank < n && sig[rank] > zero_tol) {
    ++rank;
  }

  DenseMatrix u(m, m);
  if (rank == 0) {
    u = DenseMatrix::identity(m);
  } else {
    DenseMatrix uk(m, rank);
    for (std::size_t j = 0; j < rank; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        uk(i, j) = bs(i, j) / sig[j];
      }
    }
    // Complete the orthonormal set to a full unitary basis; the QR factor of
    // an orthonormal-column matrix has a unit-modulus diagonal R, used here
    // to restore the original column phases.
    HouseholderFactors f = householder_factor(uk);
    u = f.full_q();
    for (std::size_t j = 0; j < rank; ++j) {
      const Complex d = f.r(j, j);
      const double da = std::abs(d);
      const Complex phase = da > 0.0 ? d / da : Complex(1.0);
      for (std::size_t i = 0; i < m; ++i) {
        u(i, j) *= phase;
      }
    }
  }

  return {std::move(u), std::move(sig), std::move(ws)};
}

DenseMatrix vandermonde(const DenseVector& lambda, std::size_t degree) {
  require(lambda.dim() >= 1, "vandermonde: need at least one node");
  const std::size_t n = lambda.dim();
  DenseMatrix z(n, degree + 1);
  for (std::size_t i = 0; i < n; ++i) {
    z(i, 0) = 1.0;
  }
  for (std::size_t j = 1; j <= degree; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      z(i, j) = z(i, j - 1) * lambda[i];
    }
  }
  return z;
}

}  // namespace sublab
