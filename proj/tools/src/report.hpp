#pragma once

#include <string>
#include <vector>

#include "canard/curvature.hpp"
#include "canard/odeint.hpp"
#include "canard/pseudosing.hpp"
#include "json.hpp"

namespace canard::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
const char* tool_version();

json to_json(const SpectrumReport& s);
json to_json(const PseudoSingularPoint& p, const SlowFastSystem& sys);
json to_json(const CurvaturePointResult& r);
json to_json(const CanardMetrics& m);
json to_json(const TrajectoryMeta& m);
json model_json(const SlowFastSystem& sys);
json tolerances_json(const SearchOptions& opts);

struct AnalysisOutcome {
  json report;
  bool numerical_failure = false;
  std::string jacobian_verdict;
  std::string curvature_verdict;
  bool agree = false;
};

AnalysisOutcome analyze(const SlowFastSystem& sys, const SearchBox& box, const SearchOptions& opts);

/// Deterministic rendering: sorted keys, two-space indent, trailing newline.
std::string dump(const json& j);

}  // namespace canard::cli
