#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace histkit {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kIo,
  kBadMagic,
  kBadVersion,
  kTruncated,
  kCorrupt,
  kNotFound,
  kTransport,
  kNumeric,
  kUnavailable,
};

std::string_view to_string(ErrorCode code);

// All toolkit failures are reported through this type; the code lets callers
// branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace histkit
