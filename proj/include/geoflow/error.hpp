#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geoflow {

enum class ErrorCode {
  NumericalOverflow,
  InvalidPoint,
  EnumerationTooLarge,
  DiskOverlap,
  NotProvablyDiscrete,
  SuspectSpec,
  IncompleteWindow,
  SweepBracketFailure,
  BracketFailure,
  EigenStall,
  NoOrbits,
  DerivativeMismatch,
  NumericalInstability,
  NotInPressureZeroSlice,
  BeyondFold,
  FoldReached,
  BadRay,
  ShiftNotPrimitive,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every module failure is reported through this type; `code` drives the
// CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace geoflow
