#include "avm/error.hpp"

namespace avm {

std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kInvalidArgument: return "invalid-argument";
    case ErrorCategory::kInsufficientPoints: return "insufficient-points";
    case ErrorCategory::kDegeneratePlane: return "degenerate-plane";
    case ErrorCategory::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCategory::kParse: return "parse-error";
    case ErrorCategory::kUsage: return "usage-error";
    case ErrorCategory::kIo: return "io-error";
  }
  return "unknown";
}

}  // namespace avm
