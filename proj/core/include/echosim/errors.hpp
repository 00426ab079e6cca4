#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace echosim {

enum class ErrorCode {
  InvalidItem,
  IndexOutOfRange,
  DegenerateHistory,
  InvalidRequest,
  NumericalError,
  SingularSystem,
  DegenerateCatalog,
  InvalidSlate,
  NoEdges,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Bad input as opposed to a failure while computing. The CLI maps these to
/// exit status 2.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by fixed_point when the Kronecker system is numerically singular.
class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& message, double condition_estimate);

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace echosim
