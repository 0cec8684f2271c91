#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sanvaad {

/// Failure categories surfaced by the library. Callers branch on these
/// rather than on message text.
enum class ErrorCode {
  invalid_argument,
  unmapped_label,
  parse,
  io,
  shape,
  bad_magic,
  unsupported_version,
  corrupt,
  duplicate_phrase,
  state,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sanvaad
