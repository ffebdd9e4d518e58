#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace activeclust {

enum class ErrorCode {
  ParseError,
  TooFewSamples,
  InvalidParameter,
  InvalidInput,
  ShapeError,
  AsymmetryError,
  NumericalError,
  InvalidConstraint,
  AlreadyInitialized,
  AlreadyCertain,
  NotCertain,
  OracleUnavailable,
  InvalidPair,
  NoCertainSets,
  AllSamplesCertain,
  NoGroundTruth,
  Pending,
  NotLogged,
  IncompatibleSession,
  IoError,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this one exception type; callers
// branch on code() rather than on the dynamic type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace activeclust
