#include "brightside/error.hpp"

namespace brightside {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ObserverOutsideBall: return "ObserverOutsideBall";
    case ErrorCode::NonpositiveScale: return "NonpositiveScale";
    case ErrorCode::BoundaryWithoutSymmetry: return "BoundaryWithoutSymmetry";
    case ErrorCode::NonfiniteInput: return "NonfiniteInput";
    case ErrorCode::DarkSidePoint: return "DarkSidePoint";
    case ErrorCode::NegativeDiscriminant: return "NegativeDiscriminant";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DegenerateProposal: return "DegenerateProposal";
    case ErrorCode::NonfiniteGradient: return "NonfiniteGradient";
    case ErrorCode::NonfiniteObjective: return "NonfiniteObjective";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::TargetFailure: return "TargetFailure";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace brightside
