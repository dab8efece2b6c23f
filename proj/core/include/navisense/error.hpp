#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace navisense {

enum class ErrorCode {
  kInvalidUtterance,
  kInvalidDepth,
  kNoDepth,
  kInvalidPoint,
  kInvalidInput,
  kEmptyLog,
  kConfigError,
};

std::string_view to_string(ErrorCode code);

/// Base error for all recoverable failures raised by the library. The code
/// lets callers branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Configuration problem; `key()` names the offending setting (dotted path).
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(ErrorCode::kConfigError, key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace navisense
