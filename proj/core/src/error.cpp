#include "navisense/error.hpp"

namespace navisense {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidUtterance: return "InvalidUtterance";
    case ErrorCode::kInvalidDepth: return "InvalidDepth";
    case ErrorCode::kNoDepth: return "NoDepth";
    case ErrorCode::kInvalidPoint: return "InvalidPoint";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kEmptyLog: return "EmptyLog";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace navisense
