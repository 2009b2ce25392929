#pragma once

#include <stdexcept>
#include <string>

namespace wcoj {

enum class ErrorCode {
  Parse,
  UnresolvedPrefix,
  Unsupported,
  Capacity,
  UnknownKey,
  UnknownPredicate,
  ArityMismatch,
  Infeasible,
  TooManyEdges,
  Io,
  InvalidArgument,
};

/// Coarse grouping used for process exit codes and C status codes.
enum class ErrorCategory { Parse, Plan, Io, Other };

constexpr ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::UnresolvedPrefix:
    case ErrorCode::Unsupported:
      return ErrorCategory::Parse;
    case ErrorCode::UnknownPredicate:
    case ErrorCode::Infeasible:
    case ErrorCode::TooManyEdges:
      return ErrorCategory::Plan;
    case ErrorCode::Io:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Other;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace wcoj
