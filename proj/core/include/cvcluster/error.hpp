#pragma once

#include <stdexcept>
#include <string>

namespace cvc {

enum class ErrorKind {
  invalid_spec,      // lattice / scheme / config violates a precondition
  invalid_argument,  // malformed operation input (shapes, ranges)
  numerical,         // non-finite results, singular matrices, non-convergence
  io,                // unreadable or malformed files
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace cvc
