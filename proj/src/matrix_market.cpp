#include "sublab/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sublab {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Whitespace token stream with 1-based line tracking; skips % comment lines
// after the header and blank lines.
class Tokenizer {
 public:
  Tokenizer(std::istream& in, std::size_t lines_consumed) : in_(in), line_(lines_consumed) {}

  std::size_t line() const noexcept { return line_; }

  bool next(std::string& token) {
    while (true) {
      if (pos_ < tokens_.size()) {
        token = tokens_[pos_++];
        return true;
      }
      std::string raw;
      if (!std::getline(in_, raw)) {
        return false;
      }
      ++line_;
      if (!raw.empty() && raw[0] == '%') {
        continue;
      }
      tokens_.clear();
      pos_ = 0;
      std::istringstream ss(raw);
      std::string t;
      while (ss >> t) {
        tokens_.push_back(t);
      }
    }
  }

  std::string require(const char* what) {
    std::string t;
    if (!next(t)) {
      throw parse_error(std::string("unexpected end of file while reading ") + what, line_);
    }
    return t;
  }

  bool at_end() {
    std::string t;
    if (next(t)) {
      --pos_;
      return false;
    }
    return true;
  }

 private:
  std::istream& in_;
  std::size_t line_;
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

double parse_number(const std::string& token, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) {
      throw parse_error("malformed numeric value '" + token + "'", line);
    }
    return v;
  } catch (const std::invalid_argument&) {
    throw parse_error("malformed numeric value '" + token + "'", line);
  } catch (const std::out_of_range&) {
    throw parse_error("numeric value out of range: '" + token + "'", line);
  }
}

std::size_t parse_index(const std::string& token, std::size_t line) {
  for (char c : token) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw parse_error("malformed index '" + token + "'", line);
    }
  }
  return static_cast<std::size_t>(std::stoull(token));
}

enum class Field { real, integer, complex_field };
enum class Symmetry { general, symmetric, hermitian, skew_symmetric };

struct Header {
  bool coordinate = false;
  Field field = Field::real;
  Symmetry symmetry = Symmetry::general;
};

Header parse_header(const std::string& line) {
  std::istringstream ss(line);
  std::string banner, object, format, field, symmetry;
  ss >> banner >> object >> format >> field >> symmetry;
  if (lower(banner) != "%%matrixmarket") {
    throw parse_error("missing %%MatrixMarket banner", 1);
  }
  if (lower(object) != "matrix") {
    throw parse_error("unsupported object '" + object + "'", 1);
  }
  Header h;
  const std::string fmt = lower(format);
  if (fmt == "coordinate") {
    h.coordinate = true;
  } else if (fmt == "array") {
    h.coordinate = false;
  } else {
    throw parse_error("unknown format '" + format + "'", 1);
  }
  const std::string fld = lower(field);
  if (fld == "real") {
    h.field = Field::real;
  } else if (fld == "integer") {
    h.field = Field::integer;
  } else if (fld == "complex") {
    h.field = Field::complex_field;
  } else if (fld == "pattern") {
    throw unsupported_format_error("pattern matrices carry no numeric values");
  } else {
    throw parse_error("unknown field '" + field + "'", 1);
  }
  const std::string sym = lower(symmetry);
  if (sym == "general") {
    h.symmetry = Symmetry::general;
  } else if (sym == "symmetric") {
    h.symmetry = Symmetry::symmetric;
  } else if (sym == "hermitian") {
    h.symmetry = Symmetry::hermitian;
  } else if (sym == "skew-symmetric") {
    h.symmetry = Symmetry::skew_symmetric;
  } else {
    throw parse_error("unknown symmetry '" + symmetry + "'", 1);
  }
  return h;
}

Complex read_value(Tokenizer& tok, Field field) {
  const std::string t1 = tok.require("matrix value");
  const double re = parse_number(t1, tok.line());
  if (field != Field::complex_field) {
    return {re, 0.0};
  }
  const std::string t2 = tok.require("imaginary part");
  return {re, parse_number(t2, tok.line())};
}

Complex mirrored(Complex v, Symmetry sym) {
  switch (sym) {
    case Symmetry::symmetric:
      return v;
    case Symmetry::hermitian:
      return std::conj(v);
    case Symmetry::skew_symmetric:
      return -v;
    case Symmetry::general:
      break;
  }
  return v;
}

std::string format_value(Complex v, bool complex_field) {
  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%.16e", v.real());
  out = buf;
  if (complex_field) {
    std::snprintf(buf, sizeof(buf), " %.16e", v.imag());
    out += buf;
  }
  return out;
}

}  // namespace

DenseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  }
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw parse_error("empty file", 1);
  }
  const Header h = parse_header(header_line);

  Tokenizer tok(in, 1);  // header already consumed
  const std::size_t rows = parse_index(tok.require("row count"), tok.line());
  const std::size_t cols = parse_index(tok.require("column count"), tok.line());
  if (rows == 0 || cols == 0) {
    throw parse_error("matrix dimensions must be positive", tok.line());
  }
  if (h.symmetry != Symmetry::general && rows != cols) {
    throw parse_error("symmetric storage requires a square matrix", tok.line());
  }

  DenseMatrix a(rows, cols);
  if (h.coordinate) {
    const std::size_t nnz = parse_index(tok.require("entry count"), tok.line());
    for (std::size_t k = 0; k < nnz; ++k) {
      const std::size_t i = parse_index(tok.require("row index"), tok.line());
      const std::size_t j = parse_index(tok.require("column index"), tok.line());
      if (i < 1 || i > rows || j < 1 || j > cols) {
        throw parse_error("index out of bounds", tok.line());
      }
      const Complex v = read_value(tok, h.field);
      a(i - 1, j - 1) = v;
      if (h.symmetry != Symmetry::general && i != j) {
        a(j - 1, i - 1) = mirrored(v, h.symmetry);
      }
    }
  } else {
    auto fill = [&](std::size_t i, std::size_t j) {
      const Complex v = read_value(tok, h.field);
      a(i, j) = v;
      if (h.symmetry != Symmetry::general && i != j) {
        a(j, i) = mirrored(v, h.symmetry);
      }
    };
    switch (h.symmetry) {
      case Symmetry::general:
        for (std::size_t j = 0; j < cols; ++j) {
          for (std::size_t i = 0; i < rows; ++i) {
            fill(i, j);
          }
        }
        break;
      case Symmetry::symmetric:
      case Symmetry::hermitian:
        for (std::size_t j = 0; j < cols; ++j) {
          for (std::size_t i = j; i < rows; ++i) {
            fill(i, j);
          }
        }
        break;
      case Symmetry::skew_symmetric:
        for (std::size_t j = 0; j < cols; ++j) {
          for (std::size_t i = j + 1; i < rows; ++i) {
            fill(i, j);
          }
        }
        break;
    }
  }
  if (!tok.at_end()) {
    throw parse_error("trailing data after expected entries", tok.line());
  }
  if (!a.is_finite()) {
    throw parse_error("matrix contains non-finite values", tok.line());
  }
  return a;
}

void write_matrix_market(const DenseMatrix& a, const std::filesystem::path& path,
                         MatrixMarketLayout layout) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  const bool complex_field =
      std::any_of(a.entries().begin(), a.entries().end(), [](Complex v) { return v.imag() != 0.0; });
  const char* field = complex_field ? "complex" : "real";

  if (layout == MatrixMarketLayout::array) {
    out << "%%MatrixMarket matrix array " << field << " general\n";
    out << a.rows() << " " << a.cols() << "\n";
    for (std::size_t j = 0; j < a.cols(); ++j) {
      for (std::size_t i = 0; i < a.rows(); ++i) {
        out << format_value(a(i, j), complex_field) << "\n";
      }
    }
  } else {
    std::size_t nnz = 0;
    for (const Complex& v : a.entries()) {
      if (v != Complex(0.0)) {
        ++nnz;
      }
    }
    out << "%%MatrixMarket matrix coordinate " << field << " general\n";
    out << a.rows() << " " << a.cols() << " " << nnz << "\n";
    for (std::size_t j = 0; j < a.cols(); ++j) {
      for (std::size_t i = 0; i < a.rows(); ++i) {
        const Complex v = a(i, j);
        if (v != Complex(0.0)) {
          out << (i + 1) << " " << (j + 1) << " " << format_value(v, complex_field) << "\n";
        }
      }
    }
  }
  if (!out) {
    throw std::runtime_error("failed writing '" + path.string() + "'");
  }
}

DenseVector read_matrix_market_vector(const std::filesystem::path& path) {
  DenseMatrix m = read_matrix_market(path);
  if (m.cols() != 1) {
    throw parse_error("expected a single-column matrix in '" + path.string() + "'", 1);
  }
  DenseVector v(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    v[i] = m(i, 0);
  }
  return v;
}

void write_matrix_market(const DenseVector& v, const std::filesystem::path& path) {
  DenseMatrix m(v.dim(), 1);
  for (std::size_t i = 0; i < v.dim(); ++i) {
    m(i, 0) = v[i];
  }
  write_matrix_market(m, path);
}

}  // namespace sublab
