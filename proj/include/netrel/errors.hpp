#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netrel {

enum class ErrorKind {
  InvalidArgument,
  InvalidNetwork,
  LengthMismatch,
  InvalidRemoval,
  VariantDisconnected,
  DisconnectedGraph,
  MissingDistribution,
  FailureModeMismatch,
  NegativeTime,
  ExactIntractable,
  EmptyTrainingSet,
  DimensionMismatch,
  PoolTooSmall,
  GridMismatch,
  ModelMismatch,
  Parse,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Process exit code used by the CLI for an error of this kind.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace netrel
