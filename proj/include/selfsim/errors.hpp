#pragma once

#include <stdexcept>
#include <string>

namespace selfsim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

/// Certification did not succeed before the precision cap was reached.
class NoConvergence : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "NoConvergence"; }
};

/// A memory or evaluation budget would be exceeded.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "BudgetExceeded"; }
};

/// Input failed validation. `pointer` is a JSON pointer to the offending field when known.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::string pointer = {})
      : Error(what), pointer_(std::move(pointer)) {}
  const char* kind() const noexcept override { return "ValidationError"; }
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

class AmbiguousCollapse : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "AmbiguousCollapse"; }
};

class AmbiguousBreakpoint : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "AmbiguousBreakpoint"; }
};

class DegenerateRoot : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "DegenerateRoot"; }
};

/// Raised when a ball that may contain zero is inverted. Callers that
/// escalate precision catch this and retry.
class BallContainsZero : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "BallContainsZero"; }
};

}  // namespace selfsim
