#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sublab {

/// A documented precondition was violated by the caller.
class contract_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The requested computation is too ill-conditioned to trust.
class conditioning_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix required to have full column rank is numerically rank deficient.
/// Carries the rank detected from the scaled R diagonal.
class rank_deficiency_error : public conditioning_error {
 public:
  rank_deficiency_error(const std::string& what, std::size_t detected_rank)
      : conditioning_error(what), detected_rank_(detected_rank) {}

  std::size_t detected_rank() const noexcept { return detected_rank_; }

 private:
  std::size_t detected_rank_;
};

/// An iterative kernel exceeded its iteration cap.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A check was invoked with too little usable data (e.g. too few cycles).
class insufficient_data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line where parsing failed.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structurally valid file in a variant this tool does not handle.
class unsupported_format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sublab
