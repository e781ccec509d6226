#include "skewlab/error.hpp"

namespace skewlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDomainViolation: return "DomainViolation";
    case ErrorCode::kDerivativeVanishes: return "DerivativeVanishes";
    case ErrorCode::kMissingDerivative: return "MissingDerivative";
    case ErrorCode::kHitCritical: return "HitCritical";
    case ErrorCode::kCapExceeded: return "CapExceeded";
    case ErrorCode::kTerminated: return "Terminated";
    case ErrorCode::kInvalidWord: return "InvalidWord";
    case ErrorCode::kInvalidConstants: return "InvalidConstants";
    case ErrorCode::kNotAGraph: return "NotAGraph";
    case ErrorCode::kNotHyperbolicLike: return "NotHyperbolicLike";
    case ErrorCode::kClosureDiverges: return "ClosureDiverges";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kDegenerateGap: return "DegenerateGap";
    case ErrorCode::kNotMonotone: return "NotMonotone";
    case ErrorCode::kEscapedDomain: return "EscapedDomain";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kDegenerateDifferential: return "DegenerateDifferential";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kIOFailure: return "IOFailure";
  }
  return "Unknown";
}

}  // namespace skewlab
