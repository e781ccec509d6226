#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skewlab {

enum class ErrorCode {
  kInvalidArgument,
  kDomainViolation,
  kDerivativeVanishes,
  kMissingDerivative,
  kHitCritical,
  kCapExceeded,
  kTerminated,
  kInvalidWord,
  kInvalidConstants,
  kNotAGraph,
  kNotHyperbolicLike,
  kClosureDiverges,
  kNotFound,
  kDegenerateGap,
  kNotMonotone,
  kEscapedDomain,
  kEmptySample,
  kDegenerateDifferential,
  kParseError,
  kValidationError,
  kIOFailure,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` identifies the failure
/// and `step()` carries the iterate index for orbit-related errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, int step = -1)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        step_(step) {}

  ErrorCode code() const noexcept { return code_; }
  int step() const noexcept { return step_; }

 private:
  ErrorCode code_;
  int step_;
};

}  // namespace skewlab
