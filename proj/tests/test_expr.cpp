#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "canard/expr.hpp"
#include "oracles.hpp"

using namespace canard;
using namespace canard::expr;

namespace {

const std::set<std::string> kXYZ = {"x", "y", "z"};

Expr random_poly(int depth) {
  const int pick = depth <= 0 ? oracle::uniform_int(0, 1) : oracle::uniform_int(0, 6);
  static const char* names[] = {"x", "y", "z"};
  switch (pick) {
    case 0: return Expr::variable(names[oracle::uniform_int(0, 2)]);
    case 1: return Expr::constant(std::round(oracle::uniform(0.0, 5.0) * 4.0) / 4.0);
    case 2: return Expr::binary(NodeKind::Add, random_poly(depth - 1), random_poly(depth - 1));
    case 3: return Expr::binary(NodeKind::Sub, random_poly(depth - 1), random_poly(depth - 1));
    case 4: return Expr::binary(NodeKind::Mul, random_poly(depth - 1), random_poly(depth - 1));
    case 5:
      return Expr::binary(NodeKind::Pow, random_poly(depth - 1), Expr::constant(oracle::uniform_int(0, 3)));
    default: return Expr::negate(random_poly(depth - 1));
  }
}

Expr random_smooth(int depth) {
  if (depth <= 0 || oracle::uniform_int(0, 3) == 0) return random_poly(1);
  static const Function fns[] = {Function::Sin, Function::Cos, Function::Tanh, Function::Exp};
  if (oracle::uniform_int(0, 1) == 0) return Expr::call(fns[oracle::uniform_int(0, 3)], random_smooth(depth - 1));
  return Expr::binary(NodeKind::Mul, random_smooth(depth - 1), random_smooth(depth - 1));
}

std::map<std::string, double> point(double x, double y, double z) { return {{"x", x}, {"y", y}, {"z", z}}; }

}  // namespace

TEST(ExprParse, CubicNonlinearity) {
  const Expr e = parse("z^3/3 - z", {"z"});
  const Node& r = e.root();
  ASSERT_EQ(r.kind, NodeKind::Sub);
  EXPECT_EQ(r.lhs->kind, NodeKind::Div);
  EXPECT_EQ(r.lhs->lhs->kind, NodeKind::Pow);
  EXPECT_EQ(r.lhs->lhs->lhs->name, "z");
  EXPECT_EQ(r.lhs->lhs->rhs->number, 3.0);
  EXPECT_EQ(r.rhs->kind, NodeKind::Variable);
}

TEST(ExprParse, SingleVariable) {
  const Expr e = parse("x", {"x"});
  EXPECT_EQ(e.root().kind, NodeKind::Variable);
  EXPECT_EQ(e.root().name, "x");
}

TEST(ExprParse, ParametersVersusVariables) {
  const Expr e = parse("c1*u^3 + c2*u", {"u"});
  EXPECT_EQ(variable_names(e), (std::set<std::string>{"u"}));
  EXPECT_EQ(parameter_names(e), (std::set<std::string>{"c1", "c2"}));
}

TEST(ExprParse, Precedence) {
  EXPECT_DOUBLE_EQ(eval_real(parse("-x^2", kXYZ), point(3, 0, 0)), -9.0);
  EXPECT_DOUBLE_EQ(eval_real(parse("2^3^2"), {}), 512.0);
  EXPECT_DOUBLE_EQ(eval_real(parse("1 - 2 - 3"), {}), -4.0);
  EXPECT_DOUBLE_EQ(eval_real(parse("8 / 4 / 2"), {}), 1.0);
  EXPECT_DOUBLE_EQ(eval_real(parse("2 + 3 * 4"), {}), 14.0);
  EXPECT_DOUBLE_EQ(eval_real(parse("(2 + 3) * 4"), {}), 20.0);
  EXPECT_DOUBLE_EQ(eval_real(parse("x^-1", kXYZ), point(4, 0, 0)), 0.25);
  EXPECT_DOUBLE_EQ(eval_real(parse("1.5e2 + 2E-1"), {}), 150.2);
}

TEST(ExprParse, ErrorsCarryPosition) {
  try {
    parse("x +\n  * y", kXYZ);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.pos().line, 2u);
    EXPECT_EQ(e.pos().column, 3u);
    EXPECT_NE(std::string(e.what()).find("2:3"), std::string::npos);
  }
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("1 +"), ParseError);
  EXPECT_THROW(parse("(x", kXYZ), ParseError);
  EXPECT_THROW(parse("3x", kXYZ), ParseError);
  EXPECT_THROW(parse("1e", kXYZ), ParseError);
  EXPECT_THROW(parse("x $ y", kXYZ), ParseError);
  EXPECT_THROW(parse("1e999"), ParseError);
}

TEST(ExprParse, UnknownFunction) {
  try {
    parse("2 * foo(x)", kXYZ);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown function 'foo'"), std::string::npos);
    EXPECT_EQ(e.pos().column, 5u);
  }
}

TEST(ExprEval, CubicAtOne) { EXPECT_NEAR(eval_real(parse("z^3/3 - z", {"z"}), {{"z", 1.0}}), -2.0 / 3.0, 1e-15); }

TEST(ExprEval, NoConstantTermAtOrigin) {
  EXPECT_EQ(eval_real(parse("x*y + z^2 - sin(x) + tanh(y)*z", kXYZ), point(0, 0, 0)), 0.0);
}

TEST(ExprEval, ChuaFourCubic) {
  const double v =
      eval_real(parse("c1*u^3+c2*u", {"u"}), {{"u", 0.782622}, {"c1", 0.393781}, {"c2", -0.72357}});
  EXPECT_NEAR(v, -0.377515, 1e-5);
  EXPECT_NEAR(v, (2.0 * -0.72357 / 3.0) * 0.782622, 1e-5);
}

TEST(ExprEval, UnboundNameIsAnError) {
  EXPECT_THROW(eval_real(parse("x + k", kXYZ), point(1, 2, 3)), EvalError);
  try {
    eval_real(parse("x + k", kXYZ), point(1, 2, 3));
  } catch (const EvalError& e) {
    EXPECT_NE(std::string(e.what()).find("'k'"), std::string::npos);
  }
}

TEST(ExprEval, DomainErrors) {
  EXPECT_THROW(eval_real(parse("ln(x)", kXYZ), point(0, 0, 0)), DomainError);
  EXPECT_THROW(eval_real(parse("ln(x)", kXYZ), point(-1, 0, 0)), DomainError);
  EXPECT_THROW(eval_real(parse("1/x", kXYZ), point(0, 0, 0)), DomainError);
  EXPECT_THROW(eval_real(parse("sqrt(x)", kXYZ), point(-1, 0, 0)), DomainError);
  EXPECT_THROW(eval_real(parse("x^0.5", kXYZ), point(-2, 0, 0)), DomainError);
  EXPECT_THROW(eval_real(parse("exp(x)", kXYZ), point(1000, 0, 0)), DomainError);
  EXPECT_DOUBLE_EQ(eval_real(parse("x^2", kXYZ), point(-2, 0, 0)), 4.0);
  EXPECT_DOUBLE_EQ(eval_real(parse("abs(x)", kXYZ), point(-2, 0, 0)), 2.0);
  EXPECT_DOUBLE_EQ(eval_real(parse("sqrt(x)", kXYZ), point(0, 0, 0)), 0.0);
}

TEST(ExprJet, SquareHasExactDerivatives) {
  const Expr e = parse("x^2", {"x"});
  const Jet2 j = eval_jet<Jet2>(e, {{"x", Jet2::variable(3.0, 1, 0)}});
  EXPECT_EQ(j.value(), 9.0);
  EXPECT_EQ(j.d(0), 6.0);
  EXPECT_EQ(j.dd(0, 0), 2.0);
  // Taylor coefficients are normalized: the second one is f''/2.
  Taylor<double> t(3.0, 2);
  t[1] = 1.0;
  const Taylor<double> s = eval_jet<Taylor<double>>(e, {{"x", t}});
  EXPECT_EQ(s[0], 9.0);
  EXPECT_EQ(s[1], 6.0);
  EXPECT_EQ(s[2], 1.0);
}

TEST(ExprJet, ConstantHasZeroDerivative) {
  const Expr e = parse("3*c + 2^2", {"x"});
  const Jet2 j = eval_jet<Jet2>(e, {{"x", Jet2::variable(0.5, 2, 0)}, {"c", Jet2(1.5, 2)}});
  EXPECT_EQ(j.value(), 8.5);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(j.d(i), 0.0);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(j.dd(i, k), 0.0);
  }
}

TEST(ExprJet, SineAtZero) {
  const Jet2 j = eval_jet<Jet2>(parse("sin(x)", {"x"}), {{"x", Jet2::variable(0.0, 1, 0)}});
  EXPECT_EQ(j.value(), 0.0);
  EXPECT_EQ(j.d(0), 1.0);
}

TEST(ExprJet, MixedShapesRejected) {
  const Expr e = parse("x + y", kXYZ);
  EXPECT_THROW(eval_jet<Jet2>(e, {{"x", Jet2::variable(1, 1, 0)}, {"y", Jet2::variable(1, 2, 0)}}), ShapeError);
  Taylor<double> a(1.0, 2), b(1.0, 3);
  EXPECT_THROW(eval_jet<Taylor<double>>(e, {{"x", a}, {"y", b}}), ShapeError);
}

TEST(ExprJet, SqrtAtZeroIsNotDifferentiable) {
  EXPECT_THROW(eval_jet<Jet2>(parse("sqrt(x)", {"x"}), {{"x", Jet2::variable(0.0, 1, 0)}}), DomainError);
}

TEST(ExprJet, ChainAndProductRules) {
  const std::set<std::string> v = {"x", "y"};
  for (int trial = 0; trial < 50; ++trial) {
    const double x = oracle::uniform(-2, 2), y = oracle::uniform(0.1, 2);
    const std::map<std::string, Jet2> b = {{"x", Jet2::variable(x, 2, 0)}, {"y", Jet2::variable(y, 2, 1)}};
    const Jet2 a = eval_jet<Jet2>(parse("sin(x^2)", v), b);
    EXPECT_NEAR(a.d(0), 2 * x * std::cos(x * x), 1e-14 * (1 + std::abs(x)));
    EXPECT_NEAR(a.dd(0, 0), 2 * std::cos(x * x) - 4 * x * x * std::sin(x * x), 1e-13 * (1 + x * x));
    const Jet2 p = eval_jet<Jet2>(parse("x*exp(y)", v), b);
    EXPECT_NEAR(p.d(0), std::exp(y), 1e-14 * std::exp(y));
    EXPECT_NEAR(p.d(1), x * std::exp(y), 1e-14 * std::exp(y) * (1 + std::abs(x)));
    EXPECT_NEAR(p.dd(0, 1), std::exp(y), 1e-14 * std::exp(y));
    const Jet2 q = eval_jet<Jet2>(parse("ln(y) / y", v), b);
    EXPECT_NEAR(q.d(1), (1 - std::log(y)) / (y * y), 1e-12 / (y * y * y));
    const Jet2 r = eval_jet<Jet2>(parse("y^1.5", v), b);
    EXPECT_NEAR(r.d(1), 1.5 * std::sqrt(y), 1e-13);
  }
}

TEST(ExprProperty, JetGradientMatchesFiniteDifferences) {
  for (int trial = 0; trial < 200; ++trial) {
    const Expr e = random_poly(4);
    const std::vector<double> x0 = {oracle::uniform(-1.5, 1.5), oracle::uniform(-1.5, 1.5),
                                    oracle::uniform(-1.5, 1.5)};
    const std::map<std::string, Jet2> b = {{"x", Jet2::variable(x0[0], 3, 0)},
                                           {"y", Jet2::variable(x0[1], 3, 1)},
                                           {"z", Jet2::variable(x0[2], 3, 2)}};
    const Jet2 j = eval_jet<Jet2>(e, b);
    oracle::Fn f = [&](const std::vector<double>& p) { return eval_real(e, point(p[0], p[1], p[2])); };
    for (std::size_t i = 0; i < 3; ++i) {
      const double fd = oracle::richardson_d1(f, x0, i);
      const double scale = 1.0 + std::abs(j.value()) + std::abs(j.d(i));
      EXPECT_NEAR(j.d(i), fd, 1e-6 * scale) << to_string(e);
    }
  }
}

TEST(ExprProperty, PrintParseRoundTrip) {
  std::vector<Expr> corpus = {parse("z^3/3 - z", kXYZ), parse("c1*x^3 + c2*x", kXYZ),
                              parse("-x - (z^3/3 - z)", kXYZ), parse("-alpha2*z - y - x", kXYZ),
                              parse("sin(x)^2 + cos(y)^-2 - abs(z)/sqrt(2) + ln(3)*tanh(x) + exp(-x^2)", kXYZ),
                              parse("1.25e-7 * x^0.5", kXYZ)};
  for (int i = 0; i < 200; ++i) corpus.push_back(random_smooth(4));
  for (const Expr& e : corpus) {
    const Expr back = parse(to_string(e), kXYZ);
    EXPECT_TRUE(structurally_equal(e, back)) << to_string(e);
    std::map<std::string, double> b = point(0.3, 0.7, -0.4);
    for (const auto& p : parameter_names(e)) b[p] = 0.9;
    double ve = 0.0;
    try {
      ve = eval_real(e, b);
    } catch (const EvalError&) {
      EXPECT_THROW(eval_real(back, b), EvalError) << to_string(e);
      continue;
    }
    EXPECT_EQ(ve, eval_real(back, b)) << to_string(e);
  }
}

TEST(ExprProgram, ConcurrentEvaluationIsPure) {
  const Expr e = parse("sin(x)*y^3 - exp(z/4)", kXYZ);
  const std::vector<std::string> slots = {"x", "y", "z"};
  const Program prog = Program::compile(e, slots, {});
  std::vector<double> results(8);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < results.size(); ++t)
    pool.emplace_back([&, t] {
      double acc = 0.0;
      for (int i = 0; i < 2000; ++i) {
        const double in[3] = {0.001 * i, 0.5, -0.25};
        acc += prog.eval<double>(std::span<const double>(in, 3));
      }
      results[t] = acc;
    });
  for (auto& th : pool) th.join();
  for (double r : results) EXPECT_EQ(r, results[0]);
}
