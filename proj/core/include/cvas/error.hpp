#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvas {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNonFiniteInput,
  kSingleClassData,
  kNoOppositeClassPrototypes,
  kDegenerateSample,
  kTooFewSamples,
  kZeroSlope,
  kSingularCovariance,
  kDomainError,
  kNegativeRadius,
  kRadiusOutOfRange,
  kIdenticalMeans,
  kSolverDidNotConverge,
  kNoActionableRecourse,
  kNoValidRecourse,
  kEmptyInput,
  kSchemaMismatch,
  kBadLabelValue,
  kEmptySplit,
  kIoError,
  kFormatError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// All library failures are reported through this type; `code()` identifies
// the failure class named in the module contracts.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cvas
