#pragma once

#include <stdexcept>
#include <string>

namespace egat {

enum class ErrorCode {
  InvalidArgument,
  MalformedRecord,
  EmptyStructure,
  MissingProbability,
  DimensionMismatch,
  DegenerateCoordinates,
  ShapeMismatch,
  DisconnectedLoss,
  NonFinite,
  VersionMismatch,
  CorruptFile,
  ConfigHashMismatch,
  EmptySplit,
  ManifestError,
  NoSelectedChain,
  Io,
};

const char* error_code_name(ErrorCode code) noexcept;

// Single exception type for the library; the code drives C API status mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace egat
