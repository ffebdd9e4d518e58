#include "activeclust/error.hpp"

namespace activeclust {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::AsymmetryError: return "AsymmetryError";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::InvalidConstraint: return "InvalidConstraint";
    case ErrorCode::AlreadyInitialized: return "AlreadyInitialized";
    case ErrorCode::AlreadyCertain: return "AlreadyCertain";
    case ErrorCode::NotCertain: return "NotCertain";
    case ErrorCode::OracleUnavailable: return "OracleUnavailable";
    case ErrorCode::InvalidPair: return "InvalidPair";
    case ErrorCode::NoCertainSets: return "NoCertainSets";
    case ErrorCode::AllSamplesCertain: return "AllSamplesCertain";
    case ErrorCode::NoGroundTruth: return "NoGroundTruth";
    case ErrorCode::Pending: return "Pending";
    case ErrorCode::NotLogged: return "NotLogged";
    case ErrorCode::IncompatibleSession: return "IncompatibleSession";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace activeclust
