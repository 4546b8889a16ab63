#include "rts/error.hpp"

namespace rts {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnknownRelease: return "UnknownRelease";
    case ErrorCode::ScopeMismatch: return "ScopeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::UnknownTestId: return "UnknownTestId";
    case ErrorCode::EmptySuite: return "EmptySuite";
    case ErrorCode::CutoffOutsideInterval: return "CutoffOutsideInterval";
    case ErrorCode::InadequateRanking: return "InadequateRanking";
    case ErrorCode::NoFaults: return "NoFaults";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::PayloadInvalid: return "PayloadInvalid";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::StoreCorrupt: return "StoreCorrupt";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace rts
