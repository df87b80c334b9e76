#pragma once

// Shared helpers and independent reference implementations used as oracles.
// Everything here deliberately avoids the library's factorization code paths
// (schoolbook products, Gaussian elimination, two-sided Jacobi, Hessenberg QR)
// so tests cross-check rather than echo the implementation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "sublab/dense.hpp"

namespace testutil {

using sublab::Complex;
using sublab::DenseMatrix;
using sublab::DenseVector;

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  DenseMatrix a(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      a(i, j) = Complex(g(rng), g(rng));
    }
  }
  return a;
}

inline DenseVector random_vector(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  DenseVector v(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    v[i] = Complex(g(rng), g(rng));
  }
  return v;
}

// Schoolbook triple-loop product.
inline DenseVector reference_matvec(const DenseMatrix& a, const DenseVector& x) {
  DenseVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      s += a(i, j) * x[j];
    }
    y[i] = s;
  }
  return y;
}

inline DenseMatrix reference_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Complex s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        s += a(i, k) * b(k, j);
      }
      c(i, j) = s;
    }
  }
  return c;
}

// Gaussian elimination with partial pivoting; square systems only.
inline DenseVector solve_gauss(DenseMatrix a, DenseVector b) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        piv = i;
      }
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(k, j), a(piv, j));
      }
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) {
        a(i, j) -= f * a(k, j);
      }
      b[i] -= f * b[k];
    }
  }
  DenseVector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    Complex s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) {
      s -= a(ii, j) * x[j];
    }
    x[ii] = s / a(ii, ii);
  }
  return x;
}

// Two-sided cyclic Jacobi for Hermitian matrices; returns eigenvalues in
// nonincreasing order. Independent of the library's one-sided SVD route.
inline std::vector<double> hermitian_eigenvalues(DenseMatrix a) {
  const std::size_t n = a.rows();
  DenseMatrix h = std::move(a);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        off += std::norm(h(p, q));
      }
    }
    double diag = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      diag += std::norm(h(p, p));
    }
    if (off <= 1e-30 * (diag + off) || off == 0.0) {
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex hpq = h(p, q);
        const double g = std::abs(hpq);
        if (g == 0.0) {
          continue;
        }
        const Complex phase = hpq / g;
        const double app = h(p, p).real();
        const double aqq = h(q, q).real();
        const double tau = (aqq - app) / (2.0 * g);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J rotates coordinates p and q: col p <- c*p - s*conj(phase)*q,
        // col q <- s*phase*p + c*q; apply as a similarity transform.
        for (std::size_t i = 0; i < n; ++i) {
          const Complex hip = h(i, p);
          const Complex hiq = h(i, q);
          h(i, p) = c * hip - s * std::conj(phase) * hiq;
          h(i, q) = s * phase * hip + c * hiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const Complex hpj = h(p, j);
          const Complex hqj = h(q, j);
          h(p, j) = c * hpj - s * phase * hqj;
          h(q, j) = s * std::conj(phase) * hpj + c * hqj;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) {
    ev[i] = h(i, i).real();
  }
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

// General complex eigenvalues: Householder reduction to Hessenberg form, then
// explicitly shifted QR iteration with deflation.
inline std::vector<Complex> complex_eigenvalues(DenseMatrix a) {
  const std::size_t n = a.rows();
  DenseMatrix h = std::move(a);

  // Hessenberg reduction.
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double colnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      colnorm += std::norm(h(i, k));
    }
    colnorm = std::sqrt(colnorm);
    if (colnorm == 0.0) {
      continue;
    }
    const Complex alpha = h(k + 1, k);
    const double aabs = std::abs(alpha);
    const Complex phase = aabs > 0.0 ? alpha / aabs : Complex(1.0);
    std::vector<Complex> v(n - k - 1);
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = h(k + 1 + i, k);
    }
    v[0] += phase * colnorm;
    double vn = 0.0;
    for (const Complex& z : v) {
      vn += std::norm(z);
    }
    vn = std::sqrt(vn);
    for (Complex& z : v) {
      z /= vn;
    }
    for (std::size_t j = 0; j < n; ++j) {  // left: H <- P H
      Complex s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        s += std::conj(v[i]) * h(k + 1 + i, j);
      }
      s *= 2.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        h(k + 1 + i, j) -= s * v[i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {  // right: H <- H P
      Complex s = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        s += h(i, k + 1 + j) * v[j];
      }
      s *= 2.0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        h(i, k + 1 + j) -= s * std::conj(v[j]);
      }
    }
  }

  std::vector<Complex> eig;
  eig.reserve(n);
  std::size_t hi = n;  // active block is rows/cols [0, hi)
  int iter_since_deflate = 0;
  const double eps = std::numeric_limits<double>::epsilon();
  while (hi > 0) {
    if (hi == 1) {
      eig.push_back(h(0, 0));
      break;
    }
    const std::size_t p = hi - 1;
    const double sub = std::abs(h(p, p - 1));
    if (sub <= eps * (std::abs(h(p - 1, p - 1)) + std::abs(h(p, p)))) {
      eig.push_back(h(p, p));
      --hi;
      iter_since_deflate = 0;
      continue;
    }
    // Wilkinson-style shift from the trailing 2x2 block.
    const Complex a11 = h(p - 1, p - 1);
    const Complex a12 = h(p - 1, p);
    const Complex a21 = h(p, p - 1);
    const Complex a22 = h(p, p);
    const Complex tr = a11 + a22;
    const Complex det = a11 * a22 - a12 * a21;
    const Complex disc = std::sqrt(tr * tr - 4.0 * det);
    Complex mu1 = (tr + disc) / 2.0;
    Complex mu2 = (tr - disc) / 2.0;
    Complex mu = std::abs(mu1 - a22) < std::abs(mu2 - a22) ? mu1 : mu2;
    if (++iter_since_deflate % 16 == 0) {
      mu += std::abs(h(p, p - 1)) * Complex(0.75, 0.25);  // exceptional shift
    }

    // Explicit shifted QR step on the active block via Givens rotations.
    std::vector<Complex> gc(hi - 1);
    std::vector<Complex> gs(hi - 1);
    for (std::size_t i = 0; i < hi; ++i) {
      h(i, i) -= mu;
    }
    for (std::size_t k = 0; k + 1 < hi; ++k) {
      const Complex x = h(k, k);
      const Complex y = h(k + 1, k);
      const double r = std::sqrt(std::norm(x) + std::norm(y));
      Complex c = 1.0, s = 0.0;
      if (r > 0.0) {
        c = std::conj(x) / r;
        s = std::conj(y) / r;
      }
      gc[k] = c;
      gs[k] = s;
      for (std::size_t j = k; j < hi; ++j) {
        const Complex t1 = h(k, j);
        const Complex t2 = h(k + 1, j);
        h(k, j) = c * t1 + s * t2;
        h(k + 1, j) = -std::conj(s) * t1 + std::conj(c) * t2;
      }
    }
    for (std::size_t k = 0; k + 1 < hi; ++k) {  // H <- R Q
      const Complex c = gc[k];
      const Complex s = gs[k];
      for (std::size_t i = 0; i <= std::min(k + 2, hi - 1); ++i) {
        const Complex t1 = h(i, k);
        const Complex t2 = h(i, k + 1);
        h(i, k) = t1 * std::conj(c) + t2 * std::conj(s);
        h(i, k + 1) = -t1 * s + t2 * c;
      }
    }
    for (std::size_t i = 0; i < hi; ++i) {
      h(i, i) += mu;
    }
  }
  return eig;
}

// Greatest defect when greedily pairing two multisets of complex numbers.
inline double multiset_match_defect(std::vector<Complex> a, std::vector<Complex> b) {
  double worst = 0.0;
  for (const Complex& x : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double d = std::abs(x - b[i]);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    worst = std::max(worst, best);
    b.erase(b.begin() + static_cast<std::ptrdiff_t>(arg));
  }
  return worst;
}

inline double matrix_defect(const DenseMatrix& a, const DenseMatrix& b) {
  return sublab::frobenius_norm(a - b);
}

}  // namespace testutil
