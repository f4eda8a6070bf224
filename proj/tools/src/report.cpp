#include "report.hpp"

namespace canard::cli {

const char* tool_version() { return CANARD_LAB_VERSION; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json to_json(const SpectrumReport& s) {
  json j;
  j["dimension"] = s.dimension;
  j["determinant"] = s.determinant;
  j["trace"] = s.trace;
  j["minor_sum"] = s.minor_sum ? json(*s.minor_sum) : json(nullptr);
  j["P"] = s.p ? json(*s.p) : json(nullptr);
  j["Q"] = s.q ? json(*s.q) : json(nullptr);
  j["R"] = s.discriminant ? json(*s.discriminant) : json(nullptr);
  j["eigenvalues"] = json::array();
  for (const auto& l : s.eigenvalues) j["eigenvalues"].push_back({l.real(), l.imag()});
  j["classification"] = to_string(s.classification);
  j["eigen_classification"] = to_string(s.eigen_classification);
  j["criteria_consistent"] = s.criteria_consistent;
  j["zero_tolerance"] = s.zero_tolerance;
  return j;
}

json to_json(const PseudoSingularPoint& p, const SlowFastSystem& sys) {
  json j;
  j["chart"] = p.chart;
  j["full"] = p.full;
  j["residual_norm"] = p.residual_norm;
  j["spectrum"] = to_json(p.spectrum);
  j["verdict"] = to_string(p.verdict);
  j["family"] = p.family;
  if (p.family) {
    j["family_direction"] = p.family_direction;
    j["pinned_variable"] = sys.full_names().at(p.pinned_index < sys.dim() ? p.pinned_index : 0);
  }
  return j;
}

json to_json(const CurvaturePointResult& r) {
  json j;
  j["chart"] = r.chart;
  j["role"] = r.role;
  if (!r.report) {
    j["error"] = r.error;
    return j;
  }
  const CurvatureReport& c = *r.report;
  j["phi"] = c.phi;
  j["grad_phi"] = c.grad_phi;
  j["grad_norm"] = c.grad_norm;
  json h = json::array();
  for (std::size_t i = 0; i < c.hessian.rows(); ++i) {
    auto row = c.hessian.row(i);
    h.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["hessian"] = h;
  j["D1"] = c.d1;
  j["D2"] = c.d2;
  j["D3"] = c.d3 ? json(*c.d3) : json(nullptr);
  j["degeneracy_tol"] = c.degeneracy_tol;
  j["hessian_class"] = to_string(c.hessian_class);
  j["verdict"] = to_string(c.verdict);
  j["extremum_violated"] = c.extremum_violated;
  return j;
}

json to_json(const CanardMetrics& m) {
  return {{"closest_approach_to_m", m.closest_approach_to_m},
          {"closest_time", m.closest_time},
          {"attracting_dwell", m.attracting_dwell},
          {"repelling_dwell", m.repelling_dwell},
          {"eta", m.eta}};
}

json to_json(const TrajectoryMeta& m) {
  return {{"solver", m.solver},
          {"rtol", m.rtol},
          {"atol", m.atol},
          {"max_step", m.max_step},
          {"fixed_step", m.fixed_step},
          {"accepted_steps", m.accepted_steps},
          {"rejected_steps", m.rejected_steps},
          {"evaluations", m.evaluations}};
}

json model_json(const SlowFastSystem& sys) {
  const ModelSpec& s = sys.spec();
  json j;
  j["name"] = s.name;
  j["builtin"] = to_string(sys.builtin());
  j["slow_vars"] = s.slow_vars;
  j["fast_var"] = s.fast_var;
  j["chart_vars"] = sys.chart_names();
  j["f"] = s.f;
  j["g"] = s.g;
  j["epsilon"] = s.epsilon;
  j["params"] = json::object();
  for (const auto& [k, v] : s.params) j["params"][k] = v;
  if (s.eliminate_x1) {
    j["elimination"] = {{"kind", "explicit"}, {"x1", *s.eliminate_x1}};
  } else {
    j["elimination"] = {{"kind", "implicit"}, {"seed", s.x1_seed}, {"tol", s.x1_tol}};
  }
  return j;
}

json tolerances_json(const SearchOptions& opts) {
  return {{"eigen_relative", kEigenRelTol},
          {"equilibrium", kEquilibriumTol},
          {"hessian_degeneracy_relative", kDegeneracyRelTol},
          {"extremum_relative", kExtremumRelTol},
          {"newton_residual", opts.residual_tol},
          {"newton_accept", opts.accept_tol},
          {"newton_max_iterations", opts.max_iterations},
          {"dedupe", opts.dedupe_tol},
          {"family_offset", kFamilyOffset}};
}

AnalysisOutcome analyze(const SlowFastSystem& sys, const SearchBox& box, const SearchOptions& opts) {
  AnalysisOutcome out;
  json& r = out.report;
  r["schema_version"] = kSchemaVersion;
  r["tool"] = {{"name", "canard_lab"}, {"version", tool_version()}};
  r["model"] = model_json(sys);
  r["tolerances"] = tolerances_json(opts);
  json jb = json::object();
  for (const auto& name : sys.full_names()) {
    const auto [lo, hi] = box.interval(name);
    jb[name] = {lo, hi};
  }
  r["search"] = {{"box", jb}, {"grid_per_axis", opts.grid_per_axis}};
  r["errors"] = json::array();
  r["warnings"] = json::array();
  r["pseudo_singular_points"] = json::array();
  r["curvature"] = json::array();
  r["threshold"] = nullptr;

  JacobianAnalysis jac;
  try {
    jac = canard_verdict_jacobian(sys, box, opts);
  } catch (const NumericalError& e) {
    out.numerical_failure = true;
    r["errors"].push_back(std::string("pseudo-singular search: ") + e.what());
    r["verdicts"] = nullptr;
    return out;
  }
  r["search"]["seeds"] = jac.search.stats.seeds;
  r["search"]["converged"] = jac.search.stats.converged;
  r["search"]["diverged"] = jac.search.stats.diverged;
  r["search"]["singular_skipped"] = jac.search.stats.singular_skipped;
  for (const auto& p : jac.search.points) r["pseudo_singular_points"].push_back(to_json(p, sys));
  if (jac.threshold) {
    r["threshold"] = {{"condition", jac.threshold->condition},
                      {"satisfied", jac.threshold->satisfied},
                      {"values", jac.threshold->values}};
  }

  const CurvatureAnalysis curv = canard_verdict_curvature(sys, jac);
  for (const auto& c : curv.points) {
    r["curvature"].push_back(to_json(c));
    if (!c.report) {
      out.numerical_failure = true;
      r["errors"].push_back("curvature test: " + c.error);
    }
  }
  out.jacobian_verdict = std::string(to_string(jac.verdict));
  out.curvature_verdict = std::string(to_string(curv.verdict));
  out.agree = curv.agrees;
  r["verdicts"] = {{"jacobian", out.jacobian_verdict},
                   {"curvature", out.curvature_verdict},
                   {"agree", curv.agrees}};
  if (!curv.agrees) r["warnings"].push_back("DISAGREEMENT: Jacobian and curvature verdicts differ");
  return out;
}

}  // namespace canard::cli
