#pragma once

// Scalar expression language for vector-field right-hand sides.
//
// Grammar (EBNF, see docs/grammar.md):
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = "-" unary | power ;
//   power   = primary [ "^" unary ] ;
//   primary = number | identifier | identifier "(" expr ")" | "(" expr ")" ;
//
// `^` binds tighter than unary minus (-x^2 == -(x^2)) and is right-associative.
// A non-negative integer literal exponent is evaluated by repeated
// multiplication; any other exponent goes through exp(b * ln(a)).

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "canard/error.hpp"
#include "canard/jet.hpp"

namespace canard::expr {

enum class NodeKind { Constant, Variable, Parameter, Negate, Add, Sub, Mul, Div, Pow, Call };
enum class Function { Sin, Cos, Exp, Ln, Tanh, Abs, Sqrt };

std::optional<Function> function_from_name(std::string_view name);
std::string_view function_name(Function fn);

struct Node {
  NodeKind kind = NodeKind::Constant;
  double number = 0.0;
  std::string name;
  Function fn = Function::Sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  SourcePos pos;
};

/// Immutable expression tree. Copies share nodes.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  bool empty() const noexcept { return root_ == nullptr; }
  const Node& root() const { return *root_; }
  const std::shared_ptr<const Node>& root_ptr() const noexcept { return root_; }

  static Expr constant(double value);
  static Expr variable(std::string name);
  static Expr parameter(std::string name);
  static Expr negate(const Expr& a);
  static Expr binary(NodeKind kind, const Expr& a, const Expr& b);
  static Expr call(Function fn, const Expr& a);

 private:
  std::shared_ptr<const Node> root_;
};

/// Identifiers listed in `variables` become Variable nodes; all others are
/// Parameter nodes. Throws ParseError with line/column on malformed input.
Expr parse(std::string_view source, const std::set<std::string>& variables = {});

/// Fully parenthesized rendering; parse(to_string(e)) is structurally equal to e
/// for every parsed expression.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

std::set<std::string> identifiers(const Expr& e);
std::set<std::string> variable_names(const Expr& e);
std::set<std::string> parameter_names(const Expr& e);

/// Expression with identifiers resolved to input slots or fixed constants.
/// Evaluation is pure and reentrant.
class Program {
 public:
  Program() = default;

  /// Names found in `slots` read the matching evaluation input; names found in
  /// `constants` are folded in. Anything else is an unbound-name EvalError.
  static Program compile(const Expr& e, std::span<const std::string> slots,
                         const std::map<std::string, double>& constants);

  std::size_t slot_count() const noexcept { return slot_count_; }
  bool empty() const noexcept { return ops_.empty(); }

  template <class T>
  T eval(std::span<const T> inputs) const;

 private:
  enum class Op : std::uint8_t { Const, Slot, Neg, Add, Sub, Mul, Div, PowInt, PowRecipInt, PowReal, Call };
  struct Instr {
    Op op = Op::Const;
    double number = 0.0;
    std::uint32_t slot = 0;
    std::int32_t a = -1;
    std::int32_t b = -1;
    unsigned exponent = 0;
    Function fn = Function::Sin;
    SourcePos pos;
  };

  std::int32_t emit(const Node& n, std::span<const std::string> slots,
                    const std::map<std::string, double>& constants);
  template <class T>
  T eval_at(std::int32_t i, std::span<const T> in, const T& proto) const;
  [[noreturn]] static void domain_error(const std::string& what, const SourcePos& pos);

  std::vector<Instr> ops_;
  std::int32_t root_ = -1;
  std::size_t slot_count_ = 0;
};

/// Evaluate over reals. Every referenced identifier must be bound.
double eval_real(const Expr& e, const std::map<std::string, double>& bindings);

/// Evaluate over jets (Jet2, Taylor<S>, Grad<T>). All bindings must share one shape.
template <class T>
T eval_jet(const Expr& e, const std::map<std::string, T>& bindings) {
  std::vector<std::string> names;
  std::vector<T> values;
  names.reserve(bindings.size());
  values.reserve(bindings.size());
  for (const auto& [k, v] : bindings) {
    names.push_back(k);
    values.push_back(v);
  }
  const Program p = Program::compile(e, names, {});
  return p.eval<T>(values);
}

// ---------------------------------------------------------------------------

template <class T>
T Program::eval(std::span<const T> inputs) const {
  if (ops_.empty()) throw EvalError("evaluating an empty expression");
  if (inputs.size() < slot_count_)
    throw EvalError("expected " + std::to_string(slot_count_) + " inputs, got " + std::to_string(inputs.size()));
  const T proto = inputs.empty() ? T{} : inputs[0];
  for (const T& x : inputs)
    if (!same_shape(x, proto))
      throw ShapeError("mixed jet shapes in bindings: " + shape_name(proto) + " vs " + shape_name(x));
  T r = eval_at<T>(root_, inputs, proto);
  if (!all_finite(r)) domain_error("non-finite result", ops_[static_cast<std::size_t>(root_)].pos);
  return r;
}

template <class T>
T Program::eval_at(std::int32_t i, std::span<const T> in, const T& proto) const {
  using std::abs;
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  using std::tanh;
  const Instr& ins = ops_[static_cast<std::size_t>(i)];
  switch (ins.op) {
    case Op::Const:
      return constant_like(proto, ins.number);
    case Op::Slot:
      return in[ins.slot];
    case Op::Neg:
      return -eval_at<T>(ins.a, in, proto);
    case Op::Add:
      return eval_at<T>(ins.a, in, proto) + eval_at<T>(ins.b, in, proto);
    case Op::Sub:
      return eval_at<T>(ins.a, in, proto) - eval_at<T>(ins.b, in, proto);
    case Op::Mul:
      return eval_at<T>(ins.a, in, proto) * eval_at<T>(ins.b, in, proto);
    case Op::Div: {
      T num = eval_at<T>(ins.a, in, proto);
      T den = eval_at<T>(ins.b, in, proto);
      if (primal(den) == 0.0) domain_error("division by zero", ins.pos);
      return num / den;
    }
    case Op::PowInt:
      return pow_int(eval_at<T>(ins.a, in, proto), ins.exponent);
    case Op::PowRecipInt: {
      T den = pow_int(eval_at<T>(ins.a, in, proto), ins.exponent);
      if (primal(den) == 0.0) domain_error("division by zero in negative power", ins.pos);
      return 1.0 / den;
    }
    case Op::PowReal: {
      T base = eval_at<T>(ins.a, in, proto);
      T expo = eval_at<T>(ins.b, in, proto);
      if (!(primal(base) > 0.0)) domain_error("real power of a non-positive base", ins.pos);
      return exp(expo * log(base));
    }
    case Op::Call: {
      T a = eval_at<T>(ins.a, in, proto);
      switch (ins.fn) {
        case Function::Sin: return sin(a);
        case Function::Cos: return cos(a);
        case Function::Exp: return exp(a);
        case Function::Tanh: return tanh(a);
        case Function::Abs: return abs(a);
        case Function::Ln:
          if (!(primal(a) > 0.0)) domain_error("ln of a non-positive argument", ins.pos);
          return log(a);
        case Function::Sqrt:
          if (primal(a) < 0.0) domain_error("sqrt of a negative argument", ins.pos);
          if constexpr (!std::is_same_v<T, double>) {
            if (primal(a) == 0.0) domain_error("sqrt is not differentiable at 0", ins.pos);
          }
          return sqrt(a);
      }
      break;
    }
  }
  throw EvalError("corrupt expression program");
}

}  // namespace canard::expr
