#include "echosim/errors.hpp"

namespace echosim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidItem: return "InvalidItem";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DegenerateHistory: return "DegenerateHistory";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DegenerateCatalog: return "DegenerateCatalog";
    case ErrorCode::InvalidSlate: return "InvalidSlate";
    case ErrorCode::NoEdges: return "NoEdges";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidItem:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::DegenerateHistory:
    case ErrorCode::InvalidRequest:
    case ErrorCode::InvalidSlate:
    case ErrorCode::ParseError:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

SingularSystemError::SingularSystemError(const std::string& message, double condition_estimate)
    : Error(ErrorCode::SingularSystem, message), condition_estimate_(condition_estimate) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace echosim
