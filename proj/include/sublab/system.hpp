#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sublab/dense.hpp"

namespace sublab {

enum class MatrixClass {
  normal,
  hermitian,
  skew_hermitian,
  diagonalizable_nonnormal,
  general,
};

const char* to_string(MatrixClass klass);
std::optional<MatrixClass> matrix_class_from_string(const std::string& name);

/// True for classes whose eigenvector matrix is unitary.
inline bool is_normal_class(MatrixClass klass) {
  return klass == MatrixClass::normal || klass == MatrixClass::hermitian ||
         klass == MatrixClass::skew_hermitian;
}

/// Eigendecomposition attached to a generated instance: A = V diag(lambda) V^{-1},
/// with V unitary exactly when the class is normal.
struct SpectralForm {
  DenseMatrix v;
  DenseVector lambda;
  MatrixClass klass = MatrixClass::general;
  double kappa_v = 1.0;     ///< condition number of V
  double sigma_min_v = 1.0; ///< smallest singular value of V
};

/// A linear system together with everything the solvers and checks consume.
struct SystemInstance {
  DenseMatrix a;
  DenseVector b;
  DenseVector x0;
  MatrixClass klass = MatrixClass::general;
  std::optional<SpectralForm> spectral;
  std::uint64_t seed = 0;

  std::size_t dim() const { return a.rows(); }
};

/// Relative defect of A V = V diag(lambda), scaled by ||A|| ||V||;
/// zero when no spectral form is attached.
double spectral_reconstruction_defect(const SystemInstance& sys);

}  // namespace sublab
