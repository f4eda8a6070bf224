#include "canard/error.hpp"

namespace canard {

std::string to_string(const SourcePos& pos) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

ParseError::ParseError(const std::string& message, SourcePos pos)
    : Error(to_string(pos) + ": " + message), pos_(pos), detail_(message) {}

}  // namespace canard
