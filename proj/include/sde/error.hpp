#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sde {

enum class ErrorKind {
  ParseError,
  MissingTask,
  RankGap,
  DuplicateTask,
  IoError,
  NoSeeds,
  ExhaustedAttempts,
  LengthMismatch,
  DimensionMismatch,
  NoReferenceTests,
  DegenerateLabels,
  DegenerateVariance,
  InvalidArgument,
  SchemaMismatch,
  HttpError,
  MissingApiKey,
  OutputDecodeError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for every harness-level failure. `kind()` lets
/// callers branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sde
