#pragma once

#include <filesystem>

#include "sublab/dense.hpp"

namespace sublab {

enum class MatrixMarketLayout { array, coordinate };

/// Reads an array or coordinate file with real/complex/integer field and
/// general/symmetric/hermitian/skew-symmetric storage; symmetric variants are
/// expanded to full dense form. Pattern files raise unsupported_format_error;
/// malformed content raises parse_error with the offending line.
DenseMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes with 17 significant digits so a read-back reproduces the matrix
/// bit for bit. Field is complex when any entry has a nonzero imaginary part.
void write_matrix_market(const DenseMatrix& a, const std::filesystem::path& path,
                         MatrixMarketLayout layout = MatrixMarketLayout::array);

DenseVector read_matrix_market_vector(const std::filesystem::path& path);
void write_matrix_market(const DenseVector& v, const std::filesystem::path& path);

}  // namespace sublab
