#pragma once

#include <stdexcept>
#include <string>

namespace dminimax {

enum class ErrorKind {
  InvalidInput,
  InvalidBounds,
  InconsistentData,
  RankDeficient,
  NumericalBreakdown,
  InvalidGrid,
  SolveFailure,
  RiccatiBlowup,
  DimensionTooLarge,
  SingularNormalEquations,
  SingularStep,
  ParseError,
  SchemaError,
  DimensionError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::InvalidBounds: return "InvalidBounds";
    case ErrorKind::InconsistentData: return "InconsistentData";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::SolveFailure: return "SolveFailure";
    case ErrorKind::RiccatiBlowup: return "RiccatiBlowup";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorKind::SingularStep: return "SingularStep";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::DimensionError: return "DimensionError";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the kinds above so that
// callers (and the CLI exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dminimax
