#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "canard/model_file.hpp"

using namespace canard;

namespace {

void expect_same(const ModelSpec& a, const ModelSpec& b) {
  EXPECT_EQ(a.name, b.name);
  EXPECT_EQ(a.slow_vars, b.slow_vars);
  EXPECT_EQ(a.fast_var, b.fast_var);
  EXPECT_EQ(a.f, b.f);
  EXPECT_EQ(a.g, b.g);
  EXPECT_EQ(a.epsilon, b.epsilon);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.eliminate_x1, b.eliminate_x1);
  if (!a.eliminate_x1) {
    EXPECT_EQ(a.x1_seed, b.x1_seed);
    EXPECT_EQ(a.x1_tol, b.x1_tol);
  }
}

std::string error_of(const std::string& text) {
  try {
    parse_model(text, "m.json");
  } catch (const ModelError& e) {
    return e.what();
  }
  return {};
}

const char* kMinimal = R"json({
  "slow_vars": ["x", "y"],
  "fast_var": "z",
  "f": ["z - y", "alpha*(x + y)"],
  "g": "-x - (z^3/3 - z)",
  "epsilon": 0.05,
  "params": {"alpha": 0.3}
})json";

}  // namespace

TEST(ModelFile, ParsesMinimalModel) {
  const ModelSpec s = parse_model(kMinimal);
  EXPECT_EQ(s.name, "model");
  EXPECT_EQ(s.slow_vars.size(), 2u);
  EXPECT_FALSE(s.eliminate_x1.has_value());
  EXPECT_DOUBLE_EQ(s.params.at("alpha"), 0.3);
  EXPECT_EQ(SlowFastSystem(s).builtin(), BuiltinModel::Chua3);
  EXPECT_EQ(SlowFastSystem(s).elimination().kind, EliminationRule::Kind::Implicit);
}

TEST(ModelFile, RoundTripBuiltins) {
  for (const ModelSpec& s : {chua3_spec(), chua4_spec()}) {
    const std::string text = model_to_json(s);
    expect_same(parse_model(text), s);
    EXPECT_EQ(model_to_json(parse_model(text)), text);
  }
  ModelSpec implicit = chua3_spec();
  implicit.eliminate_x1.reset();
  implicit.x1_seed = 0.25;
  implicit.x1_tol = 1e-13;
  expect_same(parse_model(model_to_json(implicit)), implicit);
}

TEST(ModelFile, SaveAndLoad) {
  const auto dir = std::filesystem::temp_directory_path() / "canard_model_file_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "chua4.json";
  save_model(chua4_spec(), path);
  expect_same(load_model(path), chua4_spec());
  EXPECT_THROW(load_model(dir / "missing.json"), ModelError);
  std::filesystem::remove_all(dir);
}

TEST(ModelFile, SampleFilesMatchBuiltins) {
  const std::filesystem::path models = std::filesystem::path(CANARD_SOURCE_DIR) / "models";
  expect_same(load_model(models / "chua3.json"), chua3_spec());
  expect_same(load_model(models / "chua4.json"), chua4_spec());
}

TEST(ModelFile, MalformedJsonReportsPosition) {
  const std::string e = error_of("{\n  \"slow_vars\": [\"x\",\n");
  EXPECT_NE(e.find("m.json:3:1"), std::string::npos) << e;
  EXPECT_NE(e.find("malformed JSON"), std::string::npos);
}

TEST(ModelFile, SchemaErrorsNameTheField) {
  EXPECT_NE(error_of(R"({"slow_vars": ["x","y"], "fast_var": "z", "f": ["1","2"], "epsilon": 1})").find("'g'"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"slow_vars": "x", "fast_var": "z", "f": [], "g": "z", "epsilon": 1})").find("slow_vars"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"slow_vars": ["x","y"], "fast_var": "z", "f": ["1","2"], "g": "z", "epsilon": "a"})")
                .find("epsilon"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"slow_vars": ["x","y"], "fast_var": "z", "f": ["1","2"], "g": "z", "epsilon": 1,
                       "colour": 1})")
                .find("unknown field 'colour'"),
            std::string::npos);
  EXPECT_NE(error_of("[1, 2]").find("top level"), std::string::npos);
}

TEST(ModelFile, ExpressionErrorsCarryFieldAndPosition) {
  const std::string e =
      error_of(R"({"slow_vars": ["x","y"], "fast_var": "z", "f": ["z - y", "alpha*("], "g": "z", "epsilon": 1,
                  "params": {"alpha": 1}})");
  EXPECT_NE(e.find("f[1]: 1:"), std::string::npos) << e;
  const std::string u = error_of(R"({"slow_vars": ["x","y"], "fast_var": "z", "f": ["z - y", "beta*x"], "g": "z",
                                    "epsilon": 1})");
  EXPECT_NE(u.find("'beta'"), std::string::npos) << u;
  const std::string p = error_of(R"({"slow_vars": ["x","y","w","v"], "fast_var": "z", "f": ["1","1","1","1"],
                                    "g": "z", "epsilon": 1})");
  EXPECT_NE(p.find("4"), std::string::npos) << p;
}
