#include "cffn/errors.hpp"

namespace cffn {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kCorruption: return "corruption error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kGeneration: return "generation error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kDegenerateInput: return "degenerate input";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kUnknownId: return "unknown id";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace cffn
