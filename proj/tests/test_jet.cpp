#include <gtest/gtest.h>

#include <cmath>

#include "canard/jet.hpp"
#include "oracles.hpp"

using namespace canard;

namespace {

Taylor<double> time_variable(double t0, std::size_t order) {
  Taylor<double> t(t0, order);
  t[1] = 1.0;
  return t;
}

double factorial(int k) { return k <= 1 ? 1.0 : k * factorial(k - 1); }

}  // namespace

TEST(Jet2, ProductAndQuotient) {
  const Jet2 x = Jet2::variable(2.0, 2, 0);
  const Jet2 y = Jet2::variable(3.0, 2, 1);
  const Jet2 p = x * x * y;
  EXPECT_EQ(p.value(), 12.0);
  EXPECT_EQ(p.d(0), 12.0);
  EXPECT_EQ(p.d(1), 4.0);
  EXPECT_EQ(p.dd(0, 0), 6.0);
  EXPECT_EQ(p.dd(0, 1), 4.0);
  EXPECT_EQ(p.dd(1, 0), 4.0);
  EXPECT_EQ(p.dd(1, 1), 0.0);
  const Jet2 q = x / y;
  EXPECT_DOUBLE_EQ(q.d(0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(q.d(1), -2.0 / 9.0);
  EXPECT_DOUBLE_EQ(q.dd(1, 1), 4.0 / 27.0);
  EXPECT_DOUBLE_EQ(q.dd(0, 1), -1.0 / 9.0);
}

TEST(Jet2, ShapeChecks) {
  EXPECT_THROW(Jet2(1.0, kMaxJetDim + 1), ShapeError);
  EXPECT_THROW(Jet2::variable(1.0, 2, 2), ShapeError);
  EXPECT_THROW(Jet2::variable(1.0, 2, 0) + Jet2::variable(1.0, 3, 0), ShapeError);
  EXPECT_FALSE(all_finite(Jet2(NAN, 1)));
}

TEST(Taylor, ExponentialSeries) {
  const Taylor<double> e = exp(time_variable(0.0, 7));
  for (int k = 0; k <= 7; ++k) EXPECT_NEAR(e[k], 1.0 / factorial(k), 1e-16);
}

TEST(Taylor, LogInvertsExp) {
  const Taylor<double> t = time_variable(0.3, 6);
  const Taylor<double> s = sin(t) * 2.0 + 1.5;
  const Taylor<double> r = log(exp(s));
  for (std::size_t k = 0; k <= 6; ++k) EXPECT_NEAR(r[k], s[k], 1e-14);
}

TEST(Taylor, PythagoreanIdentity) {
  const Taylor<double> t = time_variable(0.7, 7) * 3.0 - 1.0;
  const Taylor<double> s = sin(t), c = cos(t);
  const Taylor<double> one = s * s + c * c;
  EXPECT_NEAR(one[0], 1.0, 1e-15);
  for (std::size_t k = 1; k <= 7; ++k) EXPECT_NEAR(one[k], 0.0, 1e-12);
}

TEST(Taylor, SqrtAndDivision) {
  const Taylor<double> t = time_variable(2.0, 5);
  const Taylor<double> r = sqrt(t);
  const Taylor<double> sq = r * r;
  for (std::size_t k = 0; k <= 5; ++k) EXPECT_NEAR(sq[k], t[k], 1e-15);
  const Taylor<double> inv = 1.0 / (1.0 - time_variable(0.0, 5));
  for (std::size_t k = 0; k <= 5; ++k) EXPECT_DOUBLE_EQ(inv[k], 1.0);
}

TEST(Taylor, TanhDerivativeRelation) {
  // d/dt tanh(a) = (1 - tanh^2) a'
  const Taylor<double> a = sin(time_variable(0.2, 6)) * 1.7;
  const Taylor<double> th = tanh(a);
  const Taylor<double> rhs = (1.0 - th * th);
  for (std::size_t k = 0; k < 6; ++k) {
    double lhs_k = static_cast<double>(k + 1) * th[k + 1];
    double r = 0.0;
    for (std::size_t j = 0; j <= k; ++j) r += rhs[j] * static_cast<double>(k - j + 1) * a[k - j + 1];
    EXPECT_NEAR(lhs_k, r, 1e-12);
  }
}

TEST(Taylor, ShapeChecks) {
  EXPECT_THROW(Taylor<double>(1.0, kMaxTaylorOrder + 1), ShapeError);
  EXPECT_THROW(time_variable(0, 2) * time_variable(0, 3), ShapeError);
  Taylor<Jet2> a(Jet2(1.0, 2), 2), b(Jet2(1.0, 3), 2);
  EXPECT_THROW(a + b, ShapeError);
}

TEST(Grad, NestedGivesSecondPartials) {
  // f(x, y) = x^2 y; Grad over (x, y) on top of Jet2 over the same directions.
  const Jet2 jx = Jet2::variable(1.5, 2, 0), jy = Jet2::variable(-0.5, 2, 1);
  const Grad<Jet2> x = Grad<Jet2>::variable(jx, 2, 0);
  const Grad<Jet2> y = Grad<Jet2>::variable(jy, 2, 1);
  const Grad<Jet2> f = x * x * y;
  // df/dx = 2xy, whose Jet2 carries d/dx = 2y and d/dy = 2x.
  EXPECT_DOUBLE_EQ(f.d(0).value(), 2 * 1.5 * -0.5);
  EXPECT_DOUBLE_EQ(f.d(0).d(0), 2 * -0.5);
  EXPECT_DOUBLE_EQ(f.d(0).d(1), 2 * 1.5);
  EXPECT_DOUBLE_EQ(f.d(1).value(), 1.5 * 1.5);
  EXPECT_DOUBLE_EQ(f.d(1).dd(0, 0), 2.0);
}

TEST(Grad, TaylorOfJetChain) {
  // Compare partial of exp(sin(x) * t) time-series against finite differences.
  for (int trial = 0; trial < 20; ++trial) {
    const double x0 = oracle::uniform(-1, 1);
    Taylor<double> tx(x0, 3);
    const Grad<Taylor<double>> g = Grad<Taylor<double>>::variable(tx, 1, 0);
    Taylor<double> tt = time_variable(0.0, 3);
    const Grad<Taylor<double>> r = exp(sin(g) * Grad<Taylor<double>>(tt, 1));
    // series coefficient k of exp(sin(x) t) is sin(x)^k / k!; its x-partial is k sin^{k-1} cos / k!
    for (int k = 1; k <= 3; ++k)
      EXPECT_NEAR(r.d(0)[k], k * std::pow(std::sin(x0), k - 1) * std::cos(x0) / factorial(k), 1e-14);
  }
}

TEST(Grad, ShapeChecks) {
  EXPECT_THROW(Grad<double>(1.0, kMaxGradDim + 1), ShapeError);
  EXPECT_THROW(Grad<double>::variable(1.0, 2, 0) * Grad<double>::variable(1.0, 3, 0), ShapeError);
}

TEST(PowInt, RepeatedMultiplication) {
  EXPECT_EQ(pow_int(3.0, 0), 1.0);
  EXPECT_EQ(pow_int(3.0, 4), 81.0);
  const Jet2 x = pow_int(Jet2::variable(2.0, 1, 0), 3);
  EXPECT_EQ(x.value(), 8.0);
  EXPECT_EQ(x.d(0), 12.0);
  EXPECT_EQ(x.dd(0, 0), 12.0);
}
