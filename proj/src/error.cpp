#include "geoflow/error.hpp"

namespace geoflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NumericalOverflow: return "NumericalOverflow";
    case ErrorCode::InvalidPoint: return "InvalidPoint";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::DiskOverlap: return "DiskOverlap";
    case ErrorCode::NotProvablyDiscrete: return "NotProvablyDiscrete";
    case ErrorCode::SuspectSpec: return "SuspectSpec";
    case ErrorCode::IncompleteWindow: return "IncompleteWindow";
    case ErrorCode::SweepBracketFailure: return "SweepBracketFailure";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::EigenStall: return "EigenStall";
    case ErrorCode::NoOrbits: return "NoOrbits";
    case ErrorCode::DerivativeMismatch: return "DerivativeMismatch";
    case ErrorCode::NumericalInstability: return "NumericalInstability";
    case ErrorCode::NotInPressureZeroSlice: return "NotInPressureZeroSlice";
    case ErrorCode::BeyondFold: return "BeyondFold";
    case ErrorCode::FoldReached: return "FoldReached";
    case ErrorCode::BadRay: return "BadRay";
    case ErrorCode::ShiftNotPrimitive: return "ShiftNotPrimitive";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

}  // namespace geoflow
