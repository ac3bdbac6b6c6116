#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ragda {

enum class ErrorCode {
  BaseMismatch,
  DegenerateRetraction,
  Unsupported,
  AntipodalPoints,
  InvalidSpec,
  InvalidInput,
  EmptyBatch,
  NumericalOverflow,
  NumericalError,
  InsufficientData,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BaseMismatch: return "BaseMismatch";
    case ErrorCode::DegenerateRetraction: return "DegenerateRetraction";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::AntipodalPoints: return "AntipodalPoints";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::NumericalOverflow: return "NumericalOverflow";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above, so
/// callers can branch on `code()` without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace ragda
