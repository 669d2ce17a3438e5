#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cffn {

enum class ErrorKind {
  kDimensionMismatch,
  kIo,
  kFormat,
  kCorruption,
  kValidation,
  kGeneration,
  kConfig,
  kDegenerateInput,
  kDivergence,
  kUnknownId,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) raise(kind, message);
}

}  // namespace cffn
