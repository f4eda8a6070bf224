#include "canard/model_file.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace canard {

namespace {

using nlohmann::json;

SourcePos offset_to_pos(std::string_view text, std::size_t offset) {
  SourcePos pos;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++pos.line;
      pos.column = 1;
    } else {
      ++pos.column;
    }
  }
  return pos;
}

// Offset of the first character of the token that ends just before `end`.
std::size_t token_start(std::string_view text, std::size_t end) {
  if (end == 0 || end > text.size()) return end == 0 ? 0 : end - 1;
  std::size_t i = end - 1;
  if (text[i] == '"') {
    while (i > 0) {
      --i;
      if (text[i] == '"' && (i == 0 || text[i - 1] != '\\')) return i;
    }
    return 0;
  }
  auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+'; };
  if (!word(text[i])) return i;
  while (i > 0 && word(text[i - 1])) --i;
  return i;
}

const json& require(const json& j, const char* key, const std::string& origin) {
  auto it = j.find(key);
  if (it == j.end()) throw ModelError(origin + ": missing field '" + key + "'");
  return *it;
}

std::string as_string(const json& j, const std::string& field, const std::string& origin) {
  if (!j.is_string()) throw ModelError(origin + ": field '" + field + "' must be a string");
  return j.get<std::string>();
}

double as_number(const json& j, const std::string& field, const std::string& origin) {
  if (!j.is_number()) throw ModelError(origin + ": field '" + field + "' must be a number");
  return j.get<double>();
}

std::vector<std::string> as_string_list(const json& j, const std::string& field, const std::string& origin) {
  if (!j.is_array()) throw ModelError(origin + ": field '" + field + "' must be a list of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_string(j[i], field + "[" + std::to_string(i) + "]", origin));
  return out;
}

}  // namespace

ModelSpec parse_model(std::string_view text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const SourcePos pos = offset_to_pos(text, token_start(text, e.byte));
    throw ModelError(origin + ":" + to_string(pos) + ": malformed JSON");
  }
  if (!j.is_object()) throw ModelError(origin + ": top level must be an object");

  static const std::set<std::string> known = {"name",   "slow_vars", "fast_var",     "f",       "g",
                                              "epsilon", "params",   "eliminate_x1", "x1_seed", "x1_tol"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ModelError(origin + ": unknown field '" + k + "'");

  ModelSpec s;
  s.name = j.contains("name") ? as_string(j["name"], "name", origin) : std::string("model");
  s.slow_vars = as_string_list(require(j, "slow_vars", origin), "slow_vars", origin);
  s.fast_var = as_string(require(j, "fast_var", origin), "fast_var", origin);
  s.f = as_string_list(require(j, "f", origin), "f", origin);
  s.g = as_string(require(j, "g", origin), "g", origin);
  s.epsilon = as_number(require(j, "epsilon", origin), "epsilon", origin);
  if (j.contains("params")) {
    const json& p = j["params"];
    if (!p.is_object()) throw ModelError(origin + ": field 'params' must be an object of numbers");
    for (const auto& [k, v] : p.items()) s.params[k] = as_number(v, "params." + k, origin);
  }
  if (j.contains("eliminate_x1") && !j["eliminate_x1"].is_null())
    s.eliminate_x1 = as_string(j["eliminate_x1"], "eliminate_x1", origin);
  if (j.contains("x1_seed")) s.x1_seed = as_number(j["x1_seed"], "x1_seed", origin);
  if (j.contains("x1_tol")) s.x1_tol = as_number(j["x1_tol"], "x1_tol", origin);

  try {
    SlowFastSystem check(s);
  } catch (const ModelError& e) {
    throw ModelError(origin + ": " + e.what());
  }
  return s;
}

ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(path.string() + ": cannot open model file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path.string());
}

std::string model_to_json(const ModelSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["slow_vars"] = spec.slow_vars;
  j["fast_var"] = spec.fast_var;
  j["f"] = spec.f;
  j["g"] = spec.g;
  j["epsilon"] = spec.epsilon;
  j["params"] = json::object();
  for (const auto& [k, v] : spec.params) j["params"][k] = v;
  if (spec.eliminate_x1) {
    j["eliminate_x1"] = *spec.eliminate_x1;
  } else {
    j["x1_seed"] = spec.x1_seed;
    j["x1_tol"] = spec.x1_tol;
  }
  return j.dump(2) + "\n";
}

void save_model(const ModelSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError(path.string() + ": cannot write model file");
  out << model_to_json(spec);
}

}  // namespace canard
