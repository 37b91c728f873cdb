#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace camseer {

// Every failure the library reports is one of these kinds. The CLI maps the
// kind onto its exit code.
enum class ErrorKind {
  InvalidParameter,
  TooShortInput,
  Format,
  NonMonotonicTime,
  InfeasibleSplit,
  Infeasible,
  NumericFailure,
  ContractViolation,
  EmptyGrid,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, std::string_view what) {
  if (!condition) fail(kind, std::string(what));
}

}  // namespace camseer
