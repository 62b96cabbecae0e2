#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridtraffic {

enum class ErrorCode {
  kInvalidCoordinate,
  kInvalidRoute,
  kNotOnRoute,
  kAmbiguousPoint,
  kNoSuchPoint,
  kIllegalOverlap,
  kDuplicateRoute,
  kNoSuchRoute,
  kNoSuchVehicle,
  kInvalidKinematics,
  kCorruptState,
  kParseError,
  kSchemaError,
  kValidationError,
  kRecordError,
  kCorruptTrace,
  kRenderError,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library. `field()` names the offending
// document path (e.g. "routes[1].id") for scenario errors, and line/column
// are filled for JSON syntax errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string field = {},
        int line = 0, int column = 0);

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  ErrorCode code_;
  std::string field_;
  int line_;
  int column_;
};

}  // namespace gridtraffic
