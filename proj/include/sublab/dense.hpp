#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "sublab/errors.hpp"

namespace sublab {

using Complex = std::complex<double>;

/// Dense complex matrix with contiguous column-major storage.
/// Entries admitted through a constructor are checked finite.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols);

  /// Takes ownership of `entries` (column-major, length rows*cols).
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return entries_.empty(); }

  Complex& operator()(std::size_t i, std::size_t j) { return entries_[j * rows_ + i]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return entries_[j * rows_ + i]; }

  Complex* col(std::size_t j) { return entries_.data() + j * rows_; }
  const Complex* col(std::size_t j) const { return entries_.data() + j * rows_; }

  const std::vector<Complex>& entries() const noexcept { return entries_; }

  bool is_finite() const noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> entries_;
};

/// Dense complex vector.
class DenseVector {
 public:
  DenseVector() = default;

  explicit DenseVector(std::size_t dim) : entries_(dim) {}

  explicit DenseVector(std::vector<Complex> entries);

  std::size_t dim() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  Complex& operator[](std::size_t i) { return entries_[i]; }
  const Complex& operator[](std::size_t i) const { return entries_[i]; }

  Complex* data() noexcept { return entries_.data(); }
  const Complex* data() const noexcept { return entries_.data(); }

  const std::vector<Complex>& entries() const noexcept { return entries_; }

  bool is_finite() const noexcept;

 private:
  std::vector<Complex> entries_;
};

double norm(const DenseVector& x);

/// Inner product, conjugate-linear in the first argument.
Complex dot(const DenseVector& x, const DenseVector& y);

double frobenius_norm(const DenseMatrix& a);

DenseVector operator+(const DenseVector& x, const DenseVector& y);
DenseVector operator-(const DenseVector& x, const DenseVector& y);
DenseVector operator*(Complex s, const DenseVector& x);
DenseVector operator*(double s, const DenseVector& x);

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(Complex s, const DenseMatrix& a);

/// y = A x in complex arithmetic.
DenseVector matvec(const DenseMatrix& a, const DenseVector& x);

/// Conjugate transpose; an isometric involution.
DenseMatrix hermitian_transpose(const DenseMatrix& a);

struct QrFactors {
  DenseMatrix q;  ///< rows x cols, orthonormal columns
  DenseMatrix r;  ///< cols x cols, upper triangular
};

/// Thin QR by Householder reflections (rows >= cols). The reflector phase
/// follows sign(diagonal entry), so Q is unique only up to column phases.
QrFactors householder_qr(const DenseMatrix& a);

/// argmin_x ||b - A x|| via the QR route (rows >= cols). Throws
/// rank_deficiency_error when the scaled R diagonal collapses below
/// 1e-14 relative.
DenseVector least_squares(const DenseMatrix& a, const DenseVector& b);

struct SvdResult {
  DenseMatrix u;                        ///< rows x rows, unitary
  std::vector<double> singular_values;  ///< min(rows, cols), nonincreasing
  DenseMatrix w;                        ///< cols x cols, unitary; A = U S W^H
};

/// One-sided Jacobi SVD. Throws numerical_error if rotations have not
/// settled after 60 sweeps.
SvdResult svd(const DenseMatrix& a);

/// Moore-Penrose pseudoinverse of a full-column-rank matrix, computed as
/// R^{-1} Q^H from the QR factors (the normal equations are never formed).
DenseMatrix pseudoinverse(const DenseMatrix& k);

/// n x (degree+1) matrix with entries lambda_i^j; column 0 is all ones.
DenseMatrix vandermonde(const DenseVector& lambda, std::size_t degree);

}  // namespace sublab
