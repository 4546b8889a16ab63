#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rts {

enum class ErrorCode {
  MalformedInput,
  SchemaViolation,
  UnknownRelease,
  ScopeMismatch,
  DimensionMismatch,
  DegenerateLabels,
  UnknownTestId,
  EmptySuite,
  CutoffOutsideInterval,
  InadequateRanking,
  NoFaults,
  IllegalTransition,
  PayloadInvalid,
  NotFound,
  StoreCorrupt,
  Conflict,
  IterationLimit,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the core carries one of the codes above so that the
// C API and the HTTP layer can map it without parsing messages.
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

}  // namespace rts
