#include "netrel/errors.hpp"

#include <string>

namespace netrel {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidNetwork: return "InvalidNetwork";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidRemoval: return "InvalidRemoval";
    case ErrorKind::VariantDisconnected: return "VariantDisconnected";
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::MissingDistribution: return "MissingDistribution";
    case ErrorKind::FailureModeMismatch: return "FailureModeMismatch";
    case ErrorKind::NegativeTime: return "NegativeTime";
    case ErrorKind::ExactIntractable: return "ExactIntractable";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::PoolTooSmall: return "PoolTooSmall";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::ModelMismatch: return "ModelMismatch";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidNetwork:
    case ErrorKind::InvalidRemoval:
    case ErrorKind::VariantDisconnected:
    case ErrorKind::DisconnectedGraph:
    case ErrorKind::MissingDistribution:
    case ErrorKind::ModelMismatch:
    case ErrorKind::Parse:
      return 2;
    case ErrorKind::ExactIntractable:
      return 3;
    case ErrorKind::Io:
      return 4;
    default:
      return 1;
  }
}

}  // namespace netrel
