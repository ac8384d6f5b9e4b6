#pragma once

#include <stdexcept>
#include <string>

namespace liststand {

/// Error categories surfaced by the engine. The service maps these onto
/// HTTP status codes; the CLI prints them and exits non-zero.
enum class ErrorCode {
  invalid_argument,  // malformed input supplied by the caller
  not_found,         // unknown collection, view, entity, thread...
  conflict,          // duplicate name
  rejected,          // engine refused the operation (validation, cycles...)
  io,                // filesystem or network failure
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::rejected: return "rejected";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace liststand
