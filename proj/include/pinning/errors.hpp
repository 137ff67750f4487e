#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pinning {

/// Raised when a quantity is requested at or past expiration (tau <= 0, s >= 1).
class ExpirationReached : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when the hedging-feedback denominator has reached or crossed zero.
class SingularityError : public std::domain_error {
 public:
  SingularityError(const std::string& what, double denominator)
      : std::domain_error(what), denominator_(denominator) {}

  [[nodiscard]] double denominator() const noexcept { return denominator_; }

 private:
  double denominator_;
};

/// Raised when a hedging-force quantity is requested with n = 0 or E = 0.
class NoHedgingForce : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent input data. `line()` is 1-based, 0 when unknown.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pinning
