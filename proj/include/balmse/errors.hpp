#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace balmse {

enum class ErrorKind {
  // tabular
  MissingValue,
  UnknownCategory,
  ShapeError,
  SchemaInvalid,
  SchemaMismatch,
  EmptyCategory,
  ConstantNumeric,
  InvalidContext,
  FractionOutOfRange,
  // nn-core / models
  DimensionError,
  DegenerateWidth,
  NonFinite,
  // losses
  DegenerateCategory,
  NonBinaryTarget,
  AlphaOutOfRange,
  // metrics
  SingleClassTruth,
  LengthMismatch,
  ZeroVariance,
  DegenerateTable,
  EmptyGroup,
  SingleCluster,
  // plumbing
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Coarse failure class, used by the CLI to pick an exit code.
enum class ErrorClass { Config, Data, Numerical };

ErrorClass classify(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace balmse
