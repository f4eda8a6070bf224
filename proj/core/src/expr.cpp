#include "canard/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>

namespace canard::expr {

namespace {

constexpr std::pair<std::string_view, Function> kFunctions[] = {
    {"sin", Function::Sin}, {"cos", Function::Cos},   {"exp", Function::Exp},   {"ln", Function::Ln},
    {"tanh", Function::Tanh}, {"abs", Function::Abs}, {"sqrt", Function::Sqrt},
};

std::shared_ptr<Node> make_node(NodeKind kind, SourcePos pos = {}) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->pos = pos;
  return n;
}

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  double number = 0.0;
  SourcePos pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.pos = pos_;
    if (i_ >= src_.size()) return t;
    const char c = src_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
      return number(t);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i_;
      while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) advance();
      t.kind = Tok::Ident;
      t.text = src_.substr(start, i_ - start);
      return t;
    }
    switch (c) {
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      case '^': t.kind = Tok::Caret; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }
    t.text = src_.substr(i_, 1);
    advance();
    return t;
  }

 private:
  void advance() {
    if (src_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }

  void skip_space() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) advance();
  }

  Token number(Token t) {
    const std::size_t start = i_;
    auto digits = [&] {
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) advance();
    };
    digits();
    if (i_ < src_.size() && src_[i_] == '.') {
      advance();
      digits();
    }
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      std::size_t look = i_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        while (i_ < look) advance();
        digits();
      } else {
        throw ParseError("malformed exponent in number", pos_);
      }
    }
    t.kind = Tok::Number;
    t.text = src_.substr(start, i_ - start);
    const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
    if (res.ec != std::errc() || !std::isfinite(t.number))
      throw ParseError("number out of range '" + std::string(t.text) + "'", t.pos);
    return t;
  }

  std::string_view src_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

class Parser {
 public:
  Parser(std::string_view src, const std::set<std::string>& vars) : lex_(src), vars_(vars) { tok_ = lex_.next(); }

  Expr parse_all() {
    if (tok_.kind == Tok::End) throw ParseError("empty expression", tok_.pos);
    auto e = expr();
    if (tok_.kind != Tok::End) throw ParseError("unexpected '" + std::string(tok_.text) + "'", tok_.pos);
    return Expr(e);
  }

 private:
  using P = std::shared_ptr<const Node>;

  void bump() { tok_ = lex_.next(); }

  P binary(NodeKind k, P a, P b, SourcePos pos) {
    auto n = make_node(k, pos);
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  P expr() {
    P lhs = term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const auto k = tok_.kind == Tok::Plus ? NodeKind::Add : NodeKind::Sub;
      const auto pos = tok_.pos;
      bump();
      lhs = binary(k, lhs, term(), pos);
    }
    return lhs;
  }

  P term() {
    P lhs = unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const auto k = tok_.kind == Tok::Star ? NodeKind::Mul : NodeKind::Div;
      const auto pos = tok_.pos;
      bump();
      lhs = binary(k, lhs, unary(), pos);
    }
    return lhs;
  }

  P unary() {
    if (tok_.kind == Tok::Minus) {
      auto n = make_node(NodeKind::Negate, tok_.pos);
      bump();
      n->lhs = unary();
      return n;
    }
    return power();
  }

  P power() {
    P base = primary();
    if (tok_.kind == Tok::Caret) {
      const auto pos = tok_.pos;
      bump();
      return binary(NodeKind::Pow, base, unary(), pos);
    }
    return base;
  }

  P primary() {
    switch (tok_.kind) {
      case Tok::Number: {
        auto n = make_node(NodeKind::Constant, tok_.pos);
        n->number = tok_.number;
        bump();
        return n;
      }
      case Tok::Ident: {
        const Token id = tok_;
        bump();
        if (tok_.kind == Tok::LParen) {
          const auto fn = function_from_name(id.text);
          if (!fn) throw ParseError("unknown function '" + std::string(id.text) + "'", id.pos);
          bump();
          auto n = make_node(NodeKind::Call, id.pos);
          n->fn = *fn;
          n->lhs = expr();
          expect_rparen(id.pos);
          return n;
        }
        auto n = make_node(vars_.contains(std::string(id.text)) ? NodeKind::Variable : NodeKind::Parameter, id.pos);
        n->name = std::string(id.text);
        return n;
      }
      case Tok::LParen: {
        const auto open = tok_.pos;
        bump();
        P inner = expr();
        expect_rparen(open);
        return inner;
      }
      case Tok::End:
        throw ParseError("unexpected end of input", tok_.pos);
      default:
        throw ParseError("unexpected '" + std::string(tok_.text) + "'", tok_.pos);
    }
  }

  void expect_rparen(SourcePos open) {
    if (tok_.kind != Tok::RParen)
      throw ParseError("expected ')' to close '(' opened at " + canard::to_string(open), tok_.pos);
    bump();
  }

  Lexer lex_;
  const std::set<std::string>& vars_;
  Token tok_;
};

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void render(const Node& n, std::string& out) {
  auto bin = [&](const char* op) {
    out += '(';
    render(*n.lhs, out);
    out += op;
    render(*n.rhs, out);
    out += ')';
  };
  switch (n.kind) {
    case NodeKind::Constant: out += format_number(n.number); break;
    case NodeKind::Variable:
    case NodeKind::Parameter: out += n.name; break;
    case NodeKind::Negate:
      out += "(-";
      render(*n.lhs, out);
      out += ')';
      break;
    case NodeKind::Add: bin(" + "); break;
    case NodeKind::Sub: bin(" - "); break;
    case NodeKind::Mul: bin(" * "); break;
    case NodeKind::Div: bin(" / "); break;
    case NodeKind::Pow: bin(" ^ "); break;
    case NodeKind::Call:
      out += function_name(n.fn);
      out += '(';
      render(*n.lhs, out);
      out += ')';
      break;
  }
}

bool equal_nodes(const Node* a, const Node* b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Constant: return a->number == b->number;
    case NodeKind::Variable:
    case NodeKind::Parameter: return a->name == b->name;
    case NodeKind::Call:
      if (a->fn != b->fn) return false;
      break;
    default: break;
  }
  return equal_nodes(a->lhs.get(), b->lhs.get()) && equal_nodes(a->rhs.get(), b->rhs.get());
}

void collect(const Node& n, const std::function<void(const Node&)>& visit) {
  visit(n);
  if (n.lhs) collect(*n.lhs, visit);
  if (n.rhs) collect(*n.rhs, visit);
}

bool is_nonnegative_integer(const Node& n, unsigned& out) {
  if (n.kind != NodeKind::Constant) return false;
  const double v = n.number;
  if (v < 0.0 || v > 1024.0 || std::floor(v) != v) return false;
  out = static_cast<unsigned>(v);
  return true;
}

}  // namespace

std::optional<Function> function_from_name(std::string_view name) {
  for (const auto& [n, f] : kFunctions)
    if (n == name) return f;
  return std::nullopt;
}

std::string_view function_name(Function fn) {
  for (const auto& [n, f] : kFunctions)
    if (f == fn) return n;
  return "?";
}

Expr Expr::constant(double value) {
  auto n = make_node(NodeKind::Constant);
  n->number = value;
  return Expr(n);
}

Expr Expr::variable(std::string name) {
  auto n = make_node(NodeKind::Variable);
  n->name = std::move(name);
  return Expr(n);
}

Expr Expr::parameter(std::string name) {
  auto n = make_node(NodeKind::Parameter);
  n->name = std::move(name);
  return Expr(n);
}

Expr Expr::negate(const Expr& a) {
  auto n = make_node(NodeKind::Negate);
  n->lhs = a.root_ptr();
  return Expr(n);
}

Expr Expr::binary(NodeKind kind, const Expr& a, const Expr& b) {
  auto n = make_node(kind);
  n->lhs = a.root_ptr();
  n->rhs = b.root_ptr();
  return Expr(n);
}

Expr Expr::call(Function fn, const Expr& a) {
  auto n = make_node(NodeKind::Call);
  n->fn = fn;
  n->lhs = a.root_ptr();
  return Expr(n);
}

Expr parse(std::string_view source, const std::set<std::string>& variables) {
  return Parser(source, variables).parse_all();
}

std::string to_string(const Expr& e) {
  if (e.empty()) return {};
  std::string out;
  render(e.root(), out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) { return equal_nodes(a.root_ptr().get(), b.root_ptr().get()); }

std::set<std::string> identifiers(const Expr& e) {
  std::set<std::string> out;
  if (e.empty()) return out;
  collect(e.root(), [&](const Node& n) {
    if (n.kind == NodeKind::Variable || n.kind == NodeKind::Parameter) out.insert(n.name);
  });
  return out;
}

std::set<std::string> variable_names(const Expr& e) {
  std::set<std::string> out;
  if (e.empty()) return out;
  collect(e.root(), [&](const Node& n) {
    if (n.kind == NodeKind::Variable) out.insert(n.name);
  });
  return out;
}

std::set<std::string> parameter_names(const Expr& e) {
  std::set<std::string> out;
  if (e.empty()) return out;
  collect(e.root(), [&](const Node& n) {
    if (n.kind == NodeKind::Parameter) out.insert(n.name);
  });
  return out;
}

Program Program::compile(const Expr& e, std::span<const std::string> slots,
                         const std::map<std::string, double>& constants) {
  if (e.empty()) throw EvalError("compiling an empty expression");
  Program p;
  p.slot_count_ = slots.size();
  p.root_ = p.emit(e.root(), slots, constants);
  return p;
}

std::int32_t Program::emit(const Node& n, std::span<const std::string> slots,
                           const std::map<std::string, double>& constants) {
  Instr ins;
  ins.pos = n.pos;
  switch (n.kind) {
    case NodeKind::Constant:
      ins.op = Op::Const;
      ins.number = n.number;
      break;
    case NodeKind::Variable:
    case NodeKind::Parameter: {
      bool found = false;
      for (std::size_t i = 0; i < slots.size(); ++i)
        if (slots[i] == n.name) {
          ins.op = Op::Slot;
          ins.slot = static_cast<std::uint32_t>(i);
          found = true;
          break;
        }
      if (!found) {
        const auto it = constants.find(n.name);
        if (it == constants.end())
          throw EvalError("unbound name '" + n.name + "' at " + canard::to_string(n.pos));
        ins.op = Op::Const;
        ins.number = it->second;
      }
      break;
    }
    case NodeKind::Negate:
      ins.op = Op::Neg;
      ins.a = emit(*n.lhs, slots, constants);
      break;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
      ins.op = n.kind == NodeKind::Add   ? Op::Add
               : n.kind == NodeKind::Sub ? Op::Sub
               : n.kind == NodeKind::Mul ? Op::Mul
                                         : Op::Div;
      ins.a = emit(*n.lhs, slots, constants);
      ins.b = emit(*n.rhs, slots, constants);
      break;
    case NodeKind::Pow: {
      unsigned k = 0;
      ins.a = emit(*n.lhs, slots, constants);
      if (is_nonnegative_integer(*n.rhs, k)) {
        ins.op = Op::PowInt;
        ins.exponent = k;
      } else if (n.rhs->kind == NodeKind::Negate && is_nonnegative_integer(*n.rhs->lhs, k)) {
        ins.op = Op::PowRecipInt;
        ins.exponent = k;
      } else {
        ins.op = Op::PowReal;
        ins.b = emit(*n.rhs, slots, constants);
      }
      break;
    }
    case NodeKind::Call:
      ins.op = Op::Call;
      ins.fn = n.fn;
      ins.a = emit(*n.lhs, slots, constants);
      break;
  }
  ops_.push_back(ins);
  return static_cast<std::int32_t>(ops_.size() - 1);
}

void Program::domain_error(const std::string& what, const SourcePos& pos) {
  throw DomainError(what + " at " + canard::to_string(pos));
}

double eval_real(const Expr& e, const std::map<std::string, double>& bindings) {
  std::vector<std::string> names;
  std::vector<double> values;
  for (const auto& [k, v] : bindings) {
    names.push_back(k);
    values.push_back(v);
  }
  return Program::compile(e, names, {}).eval<double>(values);
}

}  // namespace canard::expr
