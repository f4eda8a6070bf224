#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "canard/diffgeo.hpp"
#include "canard/expr.hpp"

namespace canard {

/// Plain-text description of a slow-fast system, as read from a model file.
///
///   slow_vars   x1..xp, p in {2, 3}
///   fast_var    y1
///   f           p right-hand sides of the slow equations
///   g           right-hand side of eps * y1' = g
///   eliminate_x1  optional explicit x1(x2..xp, y1) on g = 0; when absent x1 is
///               found by 1D Newton from x1_seed to tolerance x1_tol
struct ModelSpec {
  std::string name;
  std::vector<std::string> slow_vars;
  std::string fast_var;
  std::vector<std::string> f;
  std::string g;
  double epsilon = 0.0;
  std::map<std::string, double> params;
  std::optional<std::string> eliminate_x1;
  double x1_seed = 0.0;
  double x1_tol = 1e-12;
};

struct EliminationRule {
  enum class Kind { Explicit, Implicit };
  Kind kind = Kind::Implicit;
  expr::Expr expr;  // Explicit only, over the chart variables
  double seed = 0.0;
  double tol = 1e-12;
};

enum class BuiltinModel { None, Chua3, Chua4 };
std::string_view to_string(BuiltinModel m);

struct ChuaParams3 {
  double alpha = 0.2571389636;
  double epsilon = 1.0 / 20.0;
};

struct ChuaParams4 {
  double alpha2 = 0.9;
  double beta1 = 0.121;
  double beta2 = 0.0047;
  double c1 = 0.393781;
  double c2 = -0.72357;
  double epsilon = 0.098592;
};

/// Immutable slow-fast system with p slow variables and one fast variable.
/// Full coordinates are ordered (x1, ..., xp, y1); chart coordinates drop x1.
class SlowFastSystem {
 public:
  explicit SlowFastSystem(ModelSpec spec);

  const ModelSpec& spec() const noexcept { return spec_; }
  const std::string& name() const noexcept { return spec_.name; }
  std::size_t p() const noexcept { return spec_.slow_vars.size(); }
  std::size_t dim() const noexcept { return p() + 1; }
  double epsilon() const noexcept { return spec_.epsilon; }
  const std::map<std::string, double>& params() const noexcept { return spec_.params; }
  const std::vector<std::string>& full_names() const noexcept { return full_names_; }
  const std::vector<std::string>& chart_names() const noexcept { return chart_names_; }
  const EliminationRule& elimination() const noexcept { return elimination_; }
  const std::vector<expr::Expr>& f_exprs() const noexcept { return f_exprs_; }
  const expr::Expr& g_expr() const noexcept { return g_expr_; }
  BuiltinModel builtin() const noexcept { return builtin_; }

  /// Copy with one parameter replaced. ModelError for an unknown name.
  SlowFastSystem with_param(const std::string& name, double value) const;
  SlowFastSystem with_epsilon(double epsilon) const;
  SlowFastSystem with_elimination(std::optional<std::string> eliminate_x1, double seed = 0.0) const;

  template <class T>
  T g(std::span<const T> full) const {
    return g_prog_.eval<T>(full);
  }
  template <class T>
  T f(std::size_t i, std::span<const T> full) const {
    return f_prog_.at(i).eval<T>(full);
  }
  template <class T>
  T explicit_x1(std::span<const T> chart) const {
    return elim_prog_.eval<T>(chart);
  }

  /// Full point from chart coordinates with x1 from the elimination rule.
  std::vector<double> lift(std::span<const double> chart) const;

 private:
  ModelSpec spec_;
  std::vector<std::string> full_names_;
  std::vector<std::string> chart_names_;
  std::vector<expr::Expr> f_exprs_;
  expr::Expr g_expr_;
  EliminationRule elimination_;
  std::vector<expr::Program> f_prog_;
  expr::Program g_prog_;
  expr::Program elim_prog_;
  BuiltinModel builtin_ = BuiltinModel::None;
};

ModelSpec chua3_spec(const ChuaParams3& params = {});
ModelSpec chua4_spec(const ChuaParams4& params = {});

/// Chua 3D: x' = z - y, y' = alpha (x + y), eps z' = -x - (z^3/3 - z).
SlowFastSystem chua3(const ChuaParams3& params = {});

/// Chua 4D: x' = beta1 (z - x - u), y' = beta2 z, z' = -alpha2 z - y - x,
/// eps u' = x - (c1 u^3 + c2 u). Requires c2 < 0 and beta1 > 0.
SlowFastSystem chua4(const ChuaParams4& params = {});

/// g at a full-space point.
double critical_manifold_residual(const SlowFastSystem& sys, std::span<const double> full);

/// (g, dg/dy1) at a full-space point.
std::pair<double, double> fold_residuals(const SlowFastSystem& sys, std::span<const double> full);

/// Desingularized slow flow on the chart (x2..xp, y1):
///   p = 2: (-f2 g_y,         g_x1 f1 + g_x2 f2)
///   p = 3: (-f2 g_y, -f3 g_y, g_x1 f1 + g_x2 f2 + g_x3 f3)
/// with x1 substituted by the elimination rule. Implicit elimination keeps a
/// warm start per instance; use clone() for each thread.
class ReducedField final : public VectorField {
 public:
  explicit ReducedField(std::shared_ptr<const SlowFastSystem> sys);

  std::size_t dim() const override { return sys_->p(); }
  void eval(std::span<const double> x, std::span<double> out) const override { run(x, out); }
  void eval(std::span<const Jet2> x, std::span<Jet2> out) const override { run(x, out); }
  void eval(std::span<const Taylor<double>> x, std::span<Taylor<double>> out) const override { run(x, out); }
  void eval(std::span<const Taylor<Jet2>> x, std::span<Taylor<Jet2>> out) const override { run(x, out); }

  const SlowFastSystem& system() const noexcept { return *sys_; }
  const std::vector<std::string>& names() const noexcept { return sys_->chart_names(); }
  std::shared_ptr<ReducedField> clone() const;

  /// x1 on the critical manifold above a chart point.
  template <class T>
  T x1(std::span<const T> chart) const;

 private:
  template <class T>
  void run(std::span<const T> chart, std::span<T> out) const;
  double solve_x1(std::span<const double> chart) const;

  std::shared_ptr<const SlowFastSystem> sys_;
  mutable double warm_;
};

std::shared_ptr<ReducedField> reduce(const SlowFastSystem& sys);

/// (f1, ..., fp, g / eps). ModelError when eps <= 0.
std::shared_ptr<const VectorField> full_vector_field(const SlowFastSystem& sys);

// ---------------------------------------------------------------------------

template <class T>
T ReducedField::x1(std::span<const T> chart) const {
  const SlowFastSystem& s = *sys_;
  if (s.elimination().kind == EliminationRule::Kind::Explicit) return s.explicit_x1<T>(chart);
  if constexpr (std::is_same_v<T, double>) {
    return solve_x1(chart);
  } else {
    std::vector<double> base(chart.size());
    for (std::size_t i = 0; i < chart.size(); ++i) base[i] = primal(chart[i]);
    const double x0 = solve_x1(base);
    // Newton in jet arithmetic doubles the number of correct coefficients per step.
    T x = constant_like(chart[0], x0);
    const std::size_t n = s.dim();
    std::vector<Grad<T>> full(n);
    for (int it = 0; it < 4; ++it) {
      full[0] = Grad<T>::variable(x, 1, 0);
      for (std::size_t i = 1; i < n; ++i) full[i] = Grad<T>(chart[i - 1], 1);
      const Grad<T> gv = s.g<Grad<T>>(full);
      if (primal(gv.d(0)) == 0.0) throw NumericalError("implicit elimination: dg/dx1 vanishes");
      x = x - gv.value() / gv.d(0);
    }
    return x;
  }
}

template <class T>
void ReducedField::run(std::span<const T> chart, std::span<T> out) const {
  const SlowFastSystem& s = *sys_;
  const std::size_t p = s.p();
  const std::size_t n = p + 1;
  if (chart.size() != p || out.size() != p) throw ShapeError("reduced field: wrong input dimension");

  std::vector<T> full(n);
  full[0] = x1<T>(chart);
  for (std::size_t i = 1; i < n; ++i) full[i] = chart[i - 1];

  std::vector<Grad<T>> seeded(n);
  for (std::size_t i = 0; i < n; ++i) seeded[i] = Grad<T>::variable(full[i], n, i);
  const Grad<T> gv = s.g<Grad<T>>(seeded);
  const T& gy = gv.d(p);

  std::vector<T> f(p);
  for (std::size_t i = 0; i < p; ++i) f[i] = s.f<T>(i, full);

  for (std::size_t i = 1; i < p; ++i) out[i - 1] = -(f[i] * gy);
  T tangency = gv.d(0) * f[0];
  for (std::size_t i = 1; i < p; ++i) tangency += gv.d(i) * f[i];
  out[p - 1] = tangency;
}

}  // namespace canard
