#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace avm {

enum class ErrorCategory {
  kInvalidArgument,
  kInsufficientPoints,
  kDegeneratePlane,
  kDegenerateGeometry,
  kParse,
  kUsage,
  kIo,
};

std::string_view to_string(ErrorCategory c);

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace avm
