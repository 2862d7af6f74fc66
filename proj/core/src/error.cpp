#include "stockloan/error.hpp"

namespace stockloan {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::AlphaMismatch: return "AlphaMismatch";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::PsorDivergence: return "PsorDivergence";
    case ErrorCode::BoundaryNotFound: return "BoundaryNotFound";
    case ErrorCode::InvalidBoundary: return "InvalidBoundary";
    case ErrorCode::StepCountTooSmall: return "StepCountTooSmall";
    case ErrorCode::NegativeFee: return "NegativeFee";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace stockloan
