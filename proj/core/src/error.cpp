#include "facialpulse/error.hpp"

namespace facialpulse {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kPyramidTooDeep: return "PyramidTooDeep";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNonMonotoneFrames: return "NonMonotoneFrames";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kStaleCache: return "StaleCache";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kInconsistentDimensions: return "InconsistentDimensions";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kUnknownFormatVersion: return "UnknownFormatVersion";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

bool Error::is_input_error() const noexcept {
  return code_ == ErrorCode::kFormat || code_ == ErrorCode::kUnknownFormatVersion ||
         code_ == ErrorCode::kIo;
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace facialpulse
