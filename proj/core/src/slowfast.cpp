#include "canard/slowfast.hpp"

#include <cmath>
#include <set>

namespace canard {

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(s[0])) return false;
  for (char c : s)
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  return !expr::function_from_name(s).has_value();
}

expr::Expr parse_field(const std::string& field, const std::string& src, const std::set<std::string>& vars) {
  try {
    return expr::parse(src, vars);
  } catch (const ParseError& e) {
    throw ModelError(field + ": " + e.what());
  }
}

expr::Program compile_field(const std::string& field, const expr::Expr& e, const std::vector<std::string>& slots,
                            const std::map<std::string, double>& params) {
  try {
    return expr::Program::compile(e, slots, params);
  } catch (const EvalError& err) {
    throw ModelError(field + ": " + err.what());
  }
}

bool same_structure(const SlowFastSystem& sys, const ModelSpec& ref) {
  if (sys.spec().slow_vars != ref.slow_vars || sys.spec().fast_var != ref.fast_var) return false;
  std::set<std::string> vars(ref.slow_vars.begin(), ref.slow_vars.end());
  vars.insert(ref.fast_var);
  for (std::size_t i = 0; i < ref.f.size(); ++i)
    if (!expr::structurally_equal(sys.f_exprs()[i], expr::parse(ref.f[i], vars))) return false;
  return expr::structurally_equal(sys.g_expr(), expr::parse(ref.g, vars));
}

class FullField final : public VectorField {
 public:
  explicit FullField(std::shared_ptr<const SlowFastSystem> sys) : sys_(std::move(sys)) {}
  std::size_t dim() const override { return sys_->dim(); }
  void eval(std::span<const double> x, std::span<double> out) const override { run(x, out); }
  void eval(std::span<const Jet2> x, std::span<Jet2> out) const override { run(x, out); }
  void eval(std::span<const Taylor<double>> x, std::span<Taylor<double>> out) const override { run(x, out); }
  void eval(std::span<const Taylor<Jet2>> x, std::span<Taylor<Jet2>> out) const override { run(x, out); }

 private:
  template <class T>
  void run(std::span<const T> x, std::span<T> out) const {
    const std::size_t p = sys_->p();
    if (x.size() != p + 1 || out.size() != p + 1) throw ShapeError("full field: wrong input dimension");
    for (std::size_t i = 0; i < p; ++i) out[i] = sys_->f<T>(i, x);
    out[p] = sys_->g<T>(x) / sys_->epsilon();
  }

  std::shared_ptr<const SlowFastSystem> sys_;
};

}  // namespace

std::string_view to_string(BuiltinModel m) {
  switch (m) {
    case BuiltinModel::None: return "none";
    case BuiltinModel::Chua3: return "chua3";
    case BuiltinModel::Chua4: return "chua4";
  }
  return "?";
}

SlowFastSystem::SlowFastSystem(ModelSpec spec) : spec_(std::move(spec)) {
  const std::size_t p = spec_.slow_vars.size();
  if (p != 2 && p != 3)
    throw ModelError("model declares " + std::to_string(p) +
                     " slow variables; only p = 2 or p = 3 with one fast variable is supported");
  if (spec_.f.size() != p)
    throw ModelError("model has " + std::to_string(spec_.f.size()) + " slow equations for " + std::to_string(p) +
                     " slow variables");
  if (!std::isfinite(spec_.epsilon)) throw ModelError("epsilon must be finite");
  if (!(spec_.x1_tol > 0.0)) throw ModelError("x1_tol must be positive");

  full_names_ = spec_.slow_vars;
  full_names_.push_back(spec_.fast_var);
  chart_names_.assign(full_names_.begin() + 1, full_names_.end());

  std::set<std::string> vars;
  for (const auto& v : full_names_) {
    if (!valid_identifier(v)) throw ModelError("invalid variable name '" + v + "'");
    if (!vars.insert(v).second) throw ModelError("variable '" + v + "' declared twice");
  }
  for (const auto& [k, v] : spec_.params) {
    if (!valid_identifier(k)) throw ModelError("invalid parameter name '" + k + "'");
    if (vars.count(k)) throw ModelError("parameter '" + k + "' shadows a variable");
    if (!std::isfinite(v)) throw ModelError("parameter '" + k + "' is not finite");
  }

  for (std::size_t i = 0; i < p; ++i) {
    const std::string field = "f[" + std::to_string(i) + "]";
    f_exprs_.push_back(parse_field(field, spec_.f[i], vars));
    f_prog_.push_back(compile_field(field, f_exprs_.back(), full_names_, spec_.params));
  }
  g_expr_ = parse_field("g", spec_.g, vars);
  g_prog_ = compile_field("g", g_expr_, full_names_, spec_.params);

  elimination_.seed = spec_.x1_seed;
  elimination_.tol = spec_.x1_tol;
  if (spec_.eliminate_x1) {
    const std::set<std::string> chart_vars(chart_names_.begin(), chart_names_.end());
    elimination_.kind = EliminationRule::Kind::Explicit;
    elimination_.expr = parse_field("eliminate_x1", *spec_.eliminate_x1, chart_vars);
    if (expr::identifiers(elimination_.expr).count(full_names_[0]))
      throw ModelError("eliminate_x1 must not reference " + full_names_[0]);
    elim_prog_ = compile_field("eliminate_x1", elimination_.expr, chart_names_, spec_.params);
  } else {
    elimination_.kind = EliminationRule::Kind::Implicit;
  }

  if (same_structure(*this, chua3_spec())) {
    builtin_ = BuiltinModel::Chua3;
  } else if (same_structure(*this, chua4_spec())) {
    builtin_ = BuiltinModel::Chua4;
  }
}

SlowFastSystem SlowFastSystem::with_param(const std::string& name, double value) const {
  auto it = spec_.params.find(name);
  if (it == spec_.params.end()) throw ModelError("unknown parameter '" + name + "'");
  ModelSpec s = spec_;
  s.params[name] = value;
  return SlowFastSystem(std::move(s));
}

SlowFastSystem SlowFastSystem::with_epsilon(double epsilon) const {
  ModelSpec s = spec_;
  s.epsilon = epsilon;
  return SlowFastSystem(std::move(s));
}

SlowFastSystem SlowFastSystem::with_elimination(std::optional<std::string> eliminate_x1, double seed) const {
  ModelSpec s = spec_;
  s.eliminate_x1 = std::move(eliminate_x1);
  s.x1_seed = seed;
  return SlowFastSystem(std::move(s));
}

std::vector<double> SlowFastSystem::lift(std::span<const double> chart) const {
  if (chart.size() != p()) throw ShapeError("lift: chart point has wrong dimension");
  ReducedField rf(std::make_shared<const SlowFastSystem>(*this));
  std::vector<double> full(dim());
  full[0] = rf.x1<double>(chart);
  for (std::size_t i = 0; i < chart.size(); ++i) full[i + 1] = chart[i];
  return full;
}

ModelSpec chua3_spec(const ChuaParams3& params) {
  ModelSpec s;
  s.name = "chua3";
  s.slow_vars = {"x", "y"};
  s.fast_var = "z";
  s.f = {"z - y", "alpha*(x + y)"};
  s.g = "-x - (z^3/3 - z)";
  s.epsilon = params.epsilon;
  s.params = {{"alpha", params.alpha}};
  s.eliminate_x1 = "-(z^3/3 - z)";
  return s;
}

ModelSpec chua4_spec(const ChuaParams4& params) {
  ModelSpec s;
  s.name = "chua4";
  s.slow_vars = {"x", "y", "z"};
  s.fast_var = "u";
  s.f = {"beta1*(z - x - u)", "beta2*z", "-alpha2*z - y - x"};
  s.g = "x - (c1*u^3 + c2*u)";
  s.epsilon = params.epsilon;
  s.params = {{"alpha2", params.alpha2}, {"beta1", params.beta1}, {"beta2", params.beta2},
              {"c1", params.c1},         {"c2", params.c2}};
  s.eliminate_x1 = "c1*u^3 + c2*u";
  return s;
}

SlowFastSystem chua3(const ChuaParams3& params) { return SlowFastSystem(chua3_spec(params)); }

SlowFastSystem chua4(const ChuaParams4& params) {
  if (!(params.c2 < 0.0)) throw ModelError("chua4 requires c2 < 0");
  if (!(params.beta1 > 0.0)) throw ModelError("chua4 requires beta1 > 0");
  return SlowFastSystem(chua4_spec(params));
}

double critical_manifold_residual(const SlowFastSystem& sys, std::span<const double> full) {
  if (full.size() != sys.dim()) throw ShapeError("critical_manifold_residual: wrong dimension");
  return sys.g<double>(full);
}

std::pair<double, double> fold_residuals(const SlowFastSystem& sys, std::span<const double> full) {
  const std::size_t n = sys.dim();
  if (full.size() != n) throw ShapeError("fold_residuals: wrong dimension");
  std::vector<Grad<double>> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = Grad<double>(full[i], 1);
  x[n - 1] = Grad<double>::variable(full[n - 1], 1, 0);
  const Grad<double> gv = sys.g<Grad<double>>(x);
  return {gv.value(), gv.d(0)};
}

ReducedField::ReducedField(std::shared_ptr<const SlowFastSystem> sys) : sys_(std::move(sys)) {
  if (!sys_) throw Error("reduced field needs a system");
  warm_ = sys_->elimination().seed;
}

std::shared_ptr<ReducedField> ReducedField::clone() const { return std::make_shared<ReducedField>(*this); }

double ReducedField::solve_x1(std::span<const double> chart) const {
  const SlowFastSystem& s = *sys_;
  const std::size_t n = s.dim();
  std::vector<Grad<double>> full(n);
  for (std::size_t i = 1; i < n; ++i) full[i] = Grad<double>(chart[i - 1], 1);
  const double tol = s.elimination().tol;
  double x = std::isfinite(warm_) ? warm_ : s.elimination().seed;
  for (int it = 0; it < 50; ++it) {
    full[0] = Grad<double>::variable(x, 1, 0);
    const Grad<double> gv = s.g<Grad<double>>(full);
    if (gv.d(0) == 0.0) throw NumericalError("implicit elimination: dg/dx1 vanishes at x1 = " + std::to_string(x));
    const double step = gv.value() / gv.d(0);
    x -= step;
    if (!std::isfinite(x)) break;
    if (std::abs(step) <= tol * (1.0 + std::abs(x))) {
      warm_ = x;
      return x;
    }
  }
  warm_ = s.elimination().seed;
  throw NumericalError("implicit elimination: Newton did not converge in 50 iterations");
}

std::shared_ptr<ReducedField> reduce(const SlowFastSystem& sys) {
  return std::make_shared<ReducedField>(std::make_shared<const SlowFastSystem>(sys));
}

std::shared_ptr<const VectorField> full_vector_field(const SlowFastSystem& sys) {
  if (!(sys.epsilon() > 0.0)) throw ModelError("epsilon must be positive to integrate the full system");
  return std::make_shared<FullField>(std::make_shared<const SlowFastSystem>(sys));
}

}  // namespace canard
