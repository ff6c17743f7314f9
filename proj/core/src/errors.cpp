#include "heavytail/errors.hpp"

namespace heavytail {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDomain:
      return "DomainError";
    case ErrorKind::kSpecInvalid:
      return "SpecInvalid";
    case ErrorKind::kUnderflow:
      return "UnderflowError";
    case ErrorKind::kResource:
      return "ResourceError";
    case ErrorKind::kConvergence:
      return "ConvergenceError";
    case ErrorKind::kInsufficientSamples:
      return "InsufficientSamples";
    case ErrorKind::kInsufficientData:
      return "InsufficientData";
    case ErrorKind::kConfig:
      return "ConfigError";
  }
  return "Error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace heavytail
