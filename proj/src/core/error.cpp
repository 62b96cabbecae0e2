#include "gridtraffic/core/error.hpp"

#include <utility>

namespace gridtraffic {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidCoordinate: return "InvalidCoordinate";
    case ErrorCode::kInvalidRoute: return "InvalidRoute";
    case ErrorCode::kNotOnRoute: return "NotOnRoute";
    case ErrorCode::kAmbiguousPoint: return "AmbiguousPoint";
    case ErrorCode::kNoSuchPoint: return "NoSuchPoint";
    case ErrorCode::kIllegalOverlap: return "IllegalOverlap";
    case ErrorCode::kDuplicateRoute: return "DuplicateRoute";
    case ErrorCode::kNoSuchRoute: return "NoSuchRoute";
    case ErrorCode::kNoSuchVehicle: return "NoSuchVehicle";
    case ErrorCode::kInvalidKinematics: return "InvalidKinematics";
    case ErrorCode::kCorruptState: return "CorruptState";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kRecordError: return "RecordError";
    case ErrorCode::kCorruptTrace: return "CorruptTrace";
    case ErrorCode::kRenderError: return "RenderError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message, std::string field, int line,
             int column)
    : std::runtime_error(std::move(message)),
      code_(code),
      field_(std::move(field)),
      line_(line),
      column_(column) {}

}  // namespace gridtraffic
