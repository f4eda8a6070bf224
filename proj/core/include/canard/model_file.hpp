#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "canard/slowfast.hpp"

namespace canard {

/// Parse a JSON model description. `origin` prefixes error messages.
/// Syntax errors report line:column; schema errors name the offending field.
ModelSpec parse_model(std::string_view text, const std::string& origin = "<model>");

ModelSpec load_model(const std::filesystem::path& path);

/// Pretty-printed JSON with sorted keys; parse_model(model_to_json(s)) == s.
std::string model_to_json(const ModelSpec& spec);

void save_model(const ModelSpec& spec, const std::filesystem::path& path);

}  // namespace canard
