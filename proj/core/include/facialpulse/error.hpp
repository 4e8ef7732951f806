#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facialpulse {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kPyramidTooDeep,
  kSingularSystem,
  kLengthMismatch,
  kNonMonotoneFrames,
  kDegenerateConfiguration,
  kTooShort,
  kEmptySequence,
  kStaleCache,
  kShapeMismatch,
  kEmptyDataset,
  kInconsistentDimensions,
  kEmptyInput,
  kOutOfBounds,
  kNonFiniteLoss,
  // Malformed or unreadable input files and configuration documents.
  kFormat,
  kUnknownFormatVersion,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  // True for errors caused by the shape or content of user-supplied files.
  bool is_input_error() const noexcept;

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace facialpulse
