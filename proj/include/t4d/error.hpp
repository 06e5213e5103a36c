#pragma once

#include <stdexcept>
#include <string>

namespace t4d {

enum class ErrorCode {
  InvalidArgument,
  BadMagic,
  UnsupportedVersion,
  Truncated,
  DimensionMismatch,
  IoFailure,
  NonPositiveDepth,
  BehindCamera,
  DegenerateSpec,
  DegenerateRange,
  ShapeMismatch,
  FrameCountMismatch,
  InsufficientData,
  NonFiniteLoss,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

}  // namespace t4d
