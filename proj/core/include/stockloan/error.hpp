#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stockloan {

enum class ErrorCode {
  InvalidParameter,
  AlphaMismatch,
  NonConvergence,
  InvalidGrid,
  PsorDivergence,
  BoundaryNotFound,
  InvalidBoundary,
  StepCountTooSmall,
  NegativeFee,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable error code. Every failure raised by
/// the library is an Error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stockloan
