#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "canard_cli/commands.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using canard::cli::run;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("canard_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, AnalyzeChuaThree) {
  const Result r = cli({"analyze", "--builtin", "chua3", "--param", "alpha=0.2571389636"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["pseudo_singular_points"].size(), 2u);
  for (const auto& p : j["pseudo_singular_points"]) EXPECT_EQ(p["spectrum"]["classification"], "Saddle");
  EXPECT_EQ(j["verdicts"]["jacobian"], "CanardBySaddle");
  EXPECT_EQ(j["verdicts"]["curvature"], "CanardByCurvatureSaddle");
  EXPECT_EQ(j["verdicts"]["agree"], true);
  EXPECT_TRUE(j["warnings"].empty());
  EXPECT_TRUE(j.contains("tolerances"));
}

TEST_F(CliTest, AnalyzeNegativeAlpha) {
  const Result r = cli({"analyze", "--builtin", "chua3", "--param", "alpha=-1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["verdicts"]["jacobian"], "NoCanardEvidence");
  for (const auto& p : j["pseudo_singular_points"]) EXPECT_NEAR(p["spectrum"]["determinant"].get<double>(), 10.0 / 3.0, 1e-12);
}

TEST_F(CliTest, AnalyzeIsByteIdentical) {
  const Result a = cli({"analyze", "--builtin", "chua4", "--box", "y=-1:1"});
  const Result b = cli({"analyze", "--builtin", "chua4", "--box", "y=-1:1"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const fs::path f = dir_ / "r.json";
  ASSERT_EQ(cli({"analyze", "--builtin", "chua4", "--box", "y=-1:1", "--out", f.string()}).code, 0);
  EXPECT_EQ(slurp(f), a.out);
}

TEST_F(CliTest, ModelErrorsExitTwo) {
  const fs::path bad = dir_ / "bad.json";
  std::ofstream(bad) << "{\n  \"slow_vars\": [\"x\", \"y\"]\n  \"fast_var\": \"z\"\n}\n";
  const Result r = cli({"analyze", "--model", bad.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.json:3:3"), std::string::npos) << r.err;

  const fs::path expr = dir_ / "expr.json";
  std::ofstream(expr) << R"({"slow_vars": ["x","y"], "fast_var": "z", "f": ["z - y", "a*(x +"], "g": "-x - z",
                            "epsilon": 0.1, "params": {"a": 1}})";
  const Result e = cli({"analyze", "--model", expr.string()});
  EXPECT_EQ(e.code, 2);
  EXPECT_NE(e.err.find("f[1]: 1:7"), std::string::npos) << e.err;

  EXPECT_EQ(cli({"analyze", "--model", (dir_ / "missing.json").string()}).code, 2);
  EXPECT_EQ(cli({"analyze", "--builtin", "chua5"}).code, 2);
  EXPECT_EQ(cli({"analyze", "--builtin", "chua3", "--param", "beta=1"}).code, 2);
  EXPECT_EQ(cli({"analyze", "--builtin", "chua3", "--param", "alpha"}).code, 2);
  EXPECT_EQ(cli({"analyze", "--builtin", "chua4", "--param", "c2=0.5"}).code, 2);
  EXPECT_EQ(cli({"analyze"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
}

TEST_F(CliTest, ExportModelRoundTrips) {
  const Result r = cli({"export-model", "--builtin", "chua4"});
  ASSERT_EQ(r.code, 0);
  const fs::path f = dir_ / "chua4.json";
  std::ofstream(f) << r.out;
  const Result a = cli({"analyze", "--model", f.string(), "--box", "y=-1:1"});
  const Result b = cli({"analyze", "--builtin", "chua4", "--box", "y=-1:1"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(fs::path(CANARD_SOURCE_DIR) / "models" / "chua4.json"), r.out);
  EXPECT_EQ(slurp(fs::path(CANARD_SOURCE_DIR) / "models" / "chua3.json"), cli({"export-model", "--builtin", "chua3"}).out);
}

TEST_F(CliTest, SimulateWritesOutputs) {
  const fs::path prefix = dir_ / "fig1";
  const Result r = cli({"simulate", "--builtin", "chua3", "--t-end", "30", "--out", prefix.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(prefix.string() + ".csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x,y,z");
  EXPECT_NE(slurp(prefix.string() + ".plot").find("fig1.csv"), std::string::npos);
  const json m = json::parse(slurp(prefix.string() + ".json"));
  EXPECT_EQ(m["samples"], 3001);
  EXPECT_EQ(m["pseudo_singular_metrics"].size(), 2u);
}

TEST_F(CliTest, SimulateLoopCrossesFoldLines) {
  const fs::path prefix = dir_ / "loop";
  ASSERT_EQ(cli({"simulate", "--builtin", "chua3", "--out", prefix.string()}).code, 0);
  std::istringstream in(slurp(prefix.string() + ".csv"));
  std::string line;
  std::getline(in, line);
  double zmin = 1e300, zmax = -1e300;
  while (std::getline(in, line)) {
    const double z = std::stod(line.substr(line.rfind(',') + 1));
    zmin = std::min(zmin, z);
    zmax = std::max(zmax, z);
  }
  EXPECT_GT(zmax, 1.0);
  EXPECT_LT(zmin, -1.0);
}

TEST_F(CliTest, SimulateZeroSpanAndFixedStep) {
  const fs::path prefix = dir_ / "zero";
  ASSERT_EQ(cli({"simulate", "--builtin", "chua3", "--t-end", "0", "--transient", "0", "--out", prefix.string()}).code,
            0);
  const std::string csv = slurp(prefix.string() + ".csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);

  const fs::path a = dir_ / "a", b = dir_ / "b";
  for (const fs::path& p : {a, b})
    ASSERT_EQ(cli({"simulate", "--builtin", "chua4", "--method", "rk4", "--step", "0.002", "--t-end", "20", "--out",
                   p.string()})
                  .code,
              0);
  EXPECT_EQ(slurp(a.string() + ".csv"), slurp(b.string() + ".csv"));
  EXPECT_EQ(slurp(a.string() + ".json"), slurp(b.string() + ".json"));
}

TEST_F(CliTest, SimulateBadFlags) {
  const std::string out = (dir_ / "x").string();
  EXPECT_EQ(cli({"simulate", "--builtin", "chua3", "--method", "euler", "--out", out}).code, 2);
  EXPECT_EQ(cli({"simulate", "--builtin", "chua3", "--x0", "1,2", "--out", out}).code, 2);
  EXPECT_EQ(cli({"simulate", "--builtin", "chua3", "--param", "epsilon=1e-12", "--max-step", "1", "--t-end", "5",
                 "--transient", "0", "--out", out})
                .code,
            1);
}

TEST_F(CliTest, SweepChuaFourBracketsThreshold) {
  const fs::path d = dir_ / "sweep";
  const Result r = cli({"sweep", "--builtin", "chua4", "--name", "alpha2", "--values", "0.9,0.95", "--box", "y=-1:1",
                        "--out", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(slurp(d / "summary.json"));
  ASSERT_EQ(s["results"].size(), 2u);
  EXPECT_EQ(s["results"][0]["jacobian_verdict"], "DegenerateCanardBySaddle");
  EXPECT_EQ(s["results"][1]["jacobian_verdict"], "NoCanardEvidence");
  EXPECT_TRUE(fs::exists(d / "alpha2_0.9.report.json"));
  EXPECT_TRUE(fs::exists(d / "alpha2_0.95.report.json"));
}

TEST_F(CliTest, SweepEmptyAndFailures) {
  const fs::path d = dir_ / "empty";
  ASSERT_EQ(cli({"sweep", "--builtin", "chua3", "--name", "alpha", "--values", "", "--out", d.string()}).code, 0);
  EXPECT_TRUE(json::parse(slurp(d / "summary.json"))["results"].empty());

  const fs::path f = dir_ / "fail";
  const Result r = cli({"sweep", "--builtin", "chua4", "--name", "c2", "--values", "-0.72357,0.5", "--out", f.string()});
  EXPECT_EQ(r.code, 1);
  const json s = json::parse(slurp(f / "summary.json"));
  EXPECT_FALSE(s["results"][0].contains("error"));
  EXPECT_TRUE(s["results"][1].contains("error"));

  EXPECT_EQ(cli({"sweep", "--builtin", "chua3", "--name", "nope", "--values", "1", "--out", f.string()}).code, 2);
}

TEST_F(CliTest, SweepIsDeterministicAcrossThreadCounts) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  const std::vector<std::string> base = {"sweep", "--builtin", "chua3", "--name", "alpha", "--values",
                                         "0.45,0.35,0.2571389636,0.2571389", "--out"};
  auto with = [&](const fs::path& p) {
    auto v = base;
    v.push_back(p.string());
    return v;
  };
  setenv("CANARD_LAB_THREADS", "1", 1);
  ASSERT_EQ(cli(with(a)).code, 0);
  setenv("CANARD_LAB_THREADS", "4", 1);
  ASSERT_EQ(cli(with(b)).code, 0);
  unsetenv("CANARD_LAB_THREADS");
  EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
  for (const char* v : {"0.45", "0.35", "0.2571389636", "0.2571389"}) {
    const std::string name = std::string("alpha_") + v + ".report.json";
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
}

TEST_F(CliTest, Help) {
  const Result r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("analyze"), std::string::npos);
}
