#pragma once

#include <stdexcept>
#include <string>

namespace hmd {

enum class ErrorCode {
  FileNotFound,
  Io,
  MalformedHeader,
  DimensionMismatch,
  InvalidArgument,
  OutOfRange,
  VersionMismatch,
  CorruptFile,
  InsufficientData,
  DegenerateVariance,
  SingleClass,
  PlacementFailed,
  Config,
};

/// Library-wide exception; `code()` identifies the failure class for callers
/// that need to branch on it (the CLI maps every code to a nonzero exit).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hmd
