#pragma once

// Truncated Taylor objects used for exact derivative propagation.
//
//   Jet2       value, gradient, and Hessian over d <= kMaxJetDim directions.
//              Second-order entries are true second derivatives (not halved).
//   Taylor<S>  univariate series c0 + c1 t + ... + cK t^K in time with
//              coefficients in S. Entries are normalized Taylor coefficients
//              (the k-th derivative is c_k * k!), so x^2 at x = 3 + t has
//              coefficients (9, 6, 1) and second derivative 2.
//   Grad<T>    first-order forward mode over n <= kMaxGradDim directions with
//              value and partials in T. Nesting Grad<Taylor<Jet2>> gives exact
//              partials of partials without finite differences.
//
// Every binary operation requires operands of identical shape and throws
// ShapeError otherwise. Mixing with plain doubles is always allowed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "canard/error.hpp"

namespace canard {

inline constexpr std::size_t kMaxJetDim = 6;
inline constexpr std::size_t kMaxTaylorOrder = 7;
inline constexpr std::size_t kMaxGradDim = 4;

// Shape helpers for plain doubles. Overloads for the jet types follow their
// definitions and are found by argument-dependent lookup.
inline double primal(double x) noexcept { return x; }
inline double constant_like(double, double c) noexcept { return c; }
inline bool same_shape(double, double) noexcept { return true; }
inline bool all_finite(double x) noexcept { return std::isfinite(x); }
inline std::string shape_name(double) { return "real"; }

// ---------------------------------------------------------------------------
// Jet2
// ---------------------------------------------------------------------------

class Jet2 {
 public:
  static constexpr std::size_t kHessianSize = kMaxJetDim * (kMaxJetDim + 1) / 2;

  Jet2() = default;
  Jet2(double value, std::size_t dim) : dim_(dim), v_(value) {
    if (dim > kMaxJetDim) throw ShapeError("Jet2 dimension exceeds " + std::to_string(kMaxJetDim));
  }

  static Jet2 variable(double value, std::size_t dim, std::size_t index) {
    Jet2 j(value, dim);
    if (index >= dim) throw ShapeError("Jet2 seed index out of range");
    j.g_[index] = 1.0;
    return j;
  }

  std::size_t dim() const noexcept { return dim_; }
  double value() const noexcept { return v_; }
  double& value() noexcept { return v_; }
  double d(std::size_t i) const noexcept { return g_[i]; }
  double& d(std::size_t i) noexcept { return g_[i]; }
  double dd(std::size_t i, std::size_t j) const noexcept { return h_[tri(i, j)]; }
  double& dd(std::size_t i, std::size_t j) noexcept { return h_[tri(i, j)]; }

  /// Chain rule for a unary function with f(v), f'(v), f''(v) supplied.
  Jet2 apply(double f0, double f1, double f2) const {
    Jet2 r(f0, dim_);
    for (std::size_t i = 0; i < dim_; ++i) r.g_[i] = f1 * g_[i];
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j <= i; ++j) r.h_[tri(i, j)] = f1 * h_[tri(i, j)] + f2 * g_[i] * g_[j];
    return r;
  }

  Jet2 operator-() const { return apply(-v_, -1.0, 0.0); }

  Jet2& operator+=(const Jet2& o) {
    check(o);
    v_ += o.v_;
    for (std::size_t i = 0; i < dim_; ++i) g_[i] += o.g_[i];
    for (std::size_t k = 0; k < hsize(); ++k) h_[k] += o.h_[k];
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    check(o);
    v_ -= o.v_;
    for (std::size_t i = 0; i < dim_; ++i) g_[i] -= o.g_[i];
    for (std::size_t k = 0; k < hsize(); ++k) h_[k] -= o.h_[k];
    return *this;
  }
  Jet2& operator*=(const Jet2& o) {
    check(o);
    Jet2 r(v_ * o.v_, dim_);
    for (std::size_t i = 0; i < dim_; ++i) r.g_[i] = v_ * o.g_[i] + o.v_ * g_[i];
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const std::size_t k = tri(i, j);
        r.h_[k] = v_ * o.h_[k] + o.v_ * h_[k] + g_[i] * o.g_[j] + g_[j] * o.g_[i];
      }
    *this = r;
    return *this;
  }
  Jet2& operator/=(const Jet2& o) {
    check(o);
    const double inv = 1.0 / o.v_;
    return *this *= o.apply(inv, -inv * inv, 2.0 * inv * inv * inv);
  }

  Jet2& operator+=(double c) { v_ += c; return *this; }
  Jet2& operator-=(double c) { v_ -= c; return *this; }
  Jet2& operator*=(double c) {
    v_ *= c;
    for (std::size_t i = 0; i < dim_; ++i) g_[i] *= c;
    for (std::size_t k = 0; k < hsize(); ++k) h_[k] *= c;
    return *this;
  }
  Jet2& operator/=(double c) { return *this *= 1.0 / c; }

  bool finite() const noexcept {
    if (!std::isfinite(v_)) return false;
    for (std::size_t i = 0; i < dim_; ++i)
      if (!std::isfinite(g_[i])) return false;
    for (std::size_t k = 0; k < hsize(); ++k)
      if (!std::isfinite(h_[k])) return false;
    return true;
  }

 private:
  static constexpr std::size_t tri(std::size_t i, std::size_t j) noexcept {
    if (i < j) std::swap(i, j);
    return i * (i + 1) / 2 + j;
  }
  std::size_t hsize() const noexcept { return dim_ * (dim_ + 1) / 2; }
  void check(const Jet2& o) const {
    if (o.dim_ != dim_)
      throw ShapeError("Jet2 dimension mismatch: " + std::to_string(dim_) + " vs " + std::to_string(o.dim_));
  }

  std::size_t dim_ = 0;
  double v_ = 0.0;
  std::array<double, kMaxJetDim> g_{};
  std::array<double, kHessianSize> h_{};
};

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator*(Jet2 a, const Jet2& b) { return a *= b; }
inline Jet2 operator/(Jet2 a, const Jet2& b) { return a /= b; }
inline Jet2 operator+(Jet2 a, double c) { return a += c; }
inline Jet2 operator-(Jet2 a, double c) { return a -= c; }
inline Jet2 operator*(Jet2 a, double c) { return a *= c; }
inline Jet2 operator/(Jet2 a, double c) { return a /= c; }
inline Jet2 operator+(double c, Jet2 a) { return a += c; }
inline Jet2 operator-(double c, const Jet2& a) { return -a + c; }
inline Jet2 operator*(double c, Jet2 a) { return a *= c; }
inline Jet2 operator/(double c, const Jet2& a) { return Jet2(c, a.dim()) / a; }

inline double primal(const Jet2& x) noexcept { return x.value(); }
inline Jet2 constant_like(const Jet2& proto, double c) { return Jet2(c, proto.dim()); }
inline bool same_shape(const Jet2& a, const Jet2& b) noexcept { return a.dim() == b.dim(); }
inline bool all_finite(const Jet2& x) noexcept { return x.finite(); }
inline std::string shape_name(const Jet2& x) { return "jet2[" + std::to_string(x.dim()) + "]"; }

inline Jet2 sin(const Jet2& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  return x.apply(s, c, -s);
}
inline Jet2 cos(const Jet2& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  return x.apply(c, -s, -c);
}
inline Jet2 exp(const Jet2& x) {
  const double e = std::exp(x.value());
  return x.apply(e, e, e);
}
inline Jet2 log(const Jet2& x) {
  const double inv = 1.0 / x.value();
  return x.apply(std::log(x.value()), inv, -inv * inv);
}
inline Jet2 sqrt(const Jet2& x) {
  const double s = std::sqrt(x.value());
  return x.apply(s, 0.5 / s, -0.25 / (s * x.value()));
}
inline Jet2 tanh(const Jet2& x) {
  const double t = std::tanh(x.value());
  const double d = 1.0 - t * t;
  return x.apply(t, d, -2.0 * t * d);
}
inline Jet2 abs(const Jet2& x) { return x.value() < 0.0 ? -x : x; }

// ---------------------------------------------------------------------------
// Taylor<S>
// ---------------------------------------------------------------------------

template <class S>
class Taylor {
 public:
  Taylor() = default;

  /// Constant series of the given order whose coefficients share c0's shape.
  Taylor(const S& c0, std::size_t order) : order_(order) {
    if (order > kMaxTaylorOrder) throw ShapeError("Taylor order exceeds " + std::to_string(kMaxTaylorOrder));
    c_[0] = c0;
    for (std::size_t k = 1; k <= order_; ++k) c_[k] = constant_like(c0, 0.0);
  }

  std::size_t order() const noexcept { return order_; }
  const S& operator[](std::size_t k) const noexcept { return c_[k]; }
  S& operator[](std::size_t k) noexcept { return c_[k]; }

  Taylor operator-() const {
    Taylor r = *this;
    for (std::size_t k = 0; k <= order_; ++k) r.c_[k] = -c_[k];
    return r;
  }

  Taylor& operator+=(const Taylor& o) {
    check(o);
    for (std::size_t k = 0; k <= order_; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    check(o);
    for (std::size_t k = 0; k <= order_; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Taylor& operator*=(const Taylor& o) {
    check(o);
    Taylor r(constant_like(c_[0], 0.0), order_);
    for (std::size_t k = 0; k <= order_; ++k)
      for (std::size_t j = 0; j <= k; ++j) r.c_[k] += c_[j] * o.c_[k - j];
    *this = r;
    return *this;
  }
  Taylor& operator/=(const Taylor& o) {
    check(o);
    Taylor r = *this;
    for (std::size_t k = 0; k <= order_; ++k) {
      S acc = c_[k];
      for (std::size_t j = 1; j <= k; ++j) acc -= o.c_[j] * r.c_[k - j];
      r.c_[k] = acc / o.c_[0];
    }
    *this = r;
    return *this;
  }

  Taylor& operator+=(double c) { c_[0] += c; return *this; }
  Taylor& operator-=(double c) { c_[0] -= c; return *this; }
  Taylor& operator*=(double c) {
    for (std::size_t k = 0; k <= order_; ++k) c_[k] *= c;
    return *this;
  }
  Taylor& operator/=(double c) { return *this *= 1.0 / c; }

 private:
  void check(const Taylor& o) const {
    if (o.order_ != order_ || !same_shape(c_[0], o.c_[0]))
      throw ShapeError("Taylor shape mismatch: order " + std::to_string(order_) + " vs " +
                       std::to_string(o.order_));
  }

  std::size_t order_ = 0;
  std::array<S, kMaxTaylorOrder + 1> c_{};
};

template <class S> Taylor<S> operator+(Taylor<S> a, const Taylor<S>& b) { return a += b; }
template <class S> Taylor<S> operator-(Taylor<S> a, const Taylor<S>& b) { return a -= b; }
template <class S> Taylor<S> operator*(Taylor<S> a, const Taylor<S>& b) { return a *= b; }
template <class S> Taylor<S> operator/(Taylor<S> a, const Taylor<S>& b) { return a /= b; }
template <class S> Taylor<S> operator+(Taylor<S> a, double c) { return a += c; }
template <class S> Taylor<S> operator-(Taylor<S> a, double c) { return a -= c; }
template <class S> Taylor<S> operator*(Taylor<S> a, double c) { return a *= c; }
template <class S> Taylor<S> operator/(Taylor<S> a, double c) { return a /= c; }
template <class S> Taylor<S> operator+(double c, Taylor<S> a) { return a += c; }
template <class S> Taylor<S> operator-(double c, const Taylor<S>& a) { return -a + c; }
template <class S> Taylor<S> operator*(double c, Taylor<S> a) { return a *= c; }
template <class S> Taylor<S> operator/(double c, const Taylor<S>& a) {
  return Taylor<S>(constant_like(a[0], c), a.order()) / a;
}

template <class S> double primal(const Taylor<S>& x) { return primal(x[0]); }
template <class S> Taylor<S> constant_like(const Taylor<S>& proto, double c) {
  return Taylor<S>(constant_like(proto[0], c), proto.order());
}
template <class S> bool same_shape(const Taylor<S>& a, const Taylor<S>& b) {
  return a.order() == b.order() && same_shape(a[0], b[0]);
}
template <class S> bool all_finite(const Taylor<S>& x) {
  for (std::size_t k = 0; k <= x.order(); ++k)
    if (!all_finite(x[k])) return false;
  return true;
}
template <class S> std::string shape_name(const Taylor<S>& x) {
  return "taylor" + std::to_string(x.order()) + "<" + shape_name(x[0]) + ">";
}

template <class S> Taylor<S> exp(const Taylor<S>& a) {
  using std::exp;
  Taylor<S> r(exp(a[0]), a.order());
  for (std::size_t k = 1; k <= a.order(); ++k) {
    S acc = constant_like(a[0], 0.0);
    for (std::size_t j = 1; j <= k; ++j) acc += (a[j] * r[k - j]) * static_cast<double>(j);
    r[k] = acc / static_cast<double>(k);
  }
  return r;
}

template <class S> Taylor<S> log(const Taylor<S>& a) {
  using std::log;
  Taylor<S> r(log(a[0]), a.order());
  for (std::size_t k = 1; k <= a.order(); ++k) {
    S acc = a[k];
    for (std::size_t j = 1; j < k; ++j) acc -= (r[j] * a[k - j]) * (static_cast<double>(j) / static_cast<double>(k));
    r[k] = acc / a[0];
  }
  return r;
}

namespace detail {
template <class S> void sin_cos(const Taylor<S>& a, Taylor<S>& s, Taylor<S>& c) {
  using std::cos;
  using std::sin;
  s = Taylor<S>(sin(a[0]), a.order());
  c = Taylor<S>(cos(a[0]), a.order());
  for (std::size_t k = 1; k <= a.order(); ++k) {
    S sk = constant_like(a[0], 0.0);
    S ck = constant_like(a[0], 0.0);
    for (std::size_t j = 1; j <= k; ++j) {
      const double w = static_cast<double>(j) / static_cast<double>(k);
      sk += (a[j] * c[k - j]) * w;
      ck -= (a[j] * s[k - j]) * w;
    }
    s[k] = sk;
    c[k] = ck;
  }
}
}  // namespace detail

template <class S> Taylor<S> sin(const Taylor<S>& a) {
  Taylor<S> s, c;
  detail::sin_cos(a, s, c);
  return s;
}

template <class S> Taylor<S> cos(const Taylor<S>& a) {
  Taylor<S> s, c;
  detail::sin_cos(a, s, c);
  return c;
}

template <class S> Taylor<S> sqrt(const Taylor<S>& a) {
  using std::sqrt;
  Taylor<S> r(sqrt(a[0]), a.order());
  for (std::size_t k = 1; k <= a.order(); ++k) {
    S acc = a[k];
    for (std::size_t j = 1; j < k; ++j) acc -= r[j] * r[k - j];
    r[k] = acc / (r[0] * 2.0);
  }
  return r;
}

template <class S> Taylor<S> tanh(const Taylor<S>& a) {
  using std::tanh;
  // t' = (1 - t^2) a', built coefficient by coefficient.
  Taylor<S> t(tanh(a[0]), a.order());
  Taylor<S> d(constant_like(a[0], 0.0), a.order());
  d[0] = 1.0 - t[0] * t[0];
  for (std::size_t k = 1; k <= a.order(); ++k) {
    S acc = constant_like(a[0], 0.0);
    for (std::size_t j = 1; j <= k; ++j) acc += (a[j] * d[k - j]) * (static_cast<double>(j) / static_cast<double>(k));
    t[k] = acc;
    S sq = constant_like(a[0], 0.0);
    for (std::size_t i = 0; i <= k; ++i) sq += t[i] * t[k - i];
    d[k] = -sq;
  }
  return t;
}

template <class S> Taylor<S> abs(const Taylor<S>& a) { return primal(a) < 0.0 ? -a : a; }

// ---------------------------------------------------------------------------
// Grad<T>
// ---------------------------------------------------------------------------

template <class T>
class Grad {
 public:
  Grad() = default;

  /// Constant: value with all partials zero.
  Grad(const T& value, std::size_t n) : n_(n), v_(value) {
    if (n > kMaxGradDim) throw ShapeError("Grad dimension exceeds " + std::to_string(kMaxGradDim));
    for (std::size_t i = 0; i < n_; ++i) d_[i] = constant_like(value, 0.0);
  }

  static Grad variable(const T& value, std::size_t n, std::size_t index) {
    Grad g(value, n);
    if (index >= n) throw ShapeError("Grad seed index out of range");
    g.d_[index] = constant_like(value, 1.0);
    return g;
  }

  std::size_t size() const noexcept { return n_; }
  const T& value() const noexcept { return v_; }
  const T& d(std::size_t i) const noexcept { return d_[i]; }

  /// Chain rule with f(v) and f'(v) already evaluated in T.
  Grad apply(T f0, const T& f1) const {
    Grad r(f0, n_);
    for (std::size_t i = 0; i < n_; ++i) r.d_[i] = f1 * d_[i];
    return r;
  }

  Grad operator-() const {
    Grad r = *this;
    r.v_ = -v_;
    for (std::size_t i = 0; i < n_; ++i) r.d_[i] = -d_[i];
    return r;
  }

  Grad& operator+=(const Grad& o) {
    check(o);
    v_ += o.v_;
    for (std::size_t i = 0; i < n_; ++i) d_[i] += o.d_[i];
    return *this;
  }
  Grad& operator-=(const Grad& o) {
    check(o);
    v_ -= o.v_;
    for (std::size_t i = 0; i < n_; ++i) d_[i] -= o.d_[i];
    return *this;
  }
  Grad& operator*=(const Grad& o) {
    check(o);
    for (std::size_t i = 0; i < n_; ++i) d_[i] = v_ * o.d_[i] + o.v_ * d_[i];
    v_ *= o.v_;
    return *this;
  }
  Grad& operator/=(const Grad& o) {
    check(o);
    const T q = v_ / o.v_;
    for (std::size_t i = 0; i < n_; ++i) d_[i] = (d_[i] - q * o.d_[i]) / o.v_;
    v_ = q;
    return *this;
  }

  Grad& operator+=(double c) { v_ += c; return *this; }
  Grad& operator-=(double c) { v_ -= c; return *this; }
  Grad& operator*=(double c) {
    v_ *= c;
    for (std::size_t i = 0; i < n_; ++i) d_[i] *= c;
    return *this;
  }
  Grad& operator/=(double c) { return *this *= 1.0 / c; }

 private:
  void check(const Grad& o) const {
    if (o.n_ != n_ || !same_shape(v_, o.v_))
      throw ShapeError("Grad shape mismatch: " + std::to_string(n_) + " vs " + std::to_string(o.n_));
  }

  std::size_t n_ = 0;
  T v_{};
  std::array<T, kMaxGradDim> d_{};
};

template <class T> Grad<T> operator+(Grad<T> a, const Grad<T>& b) { return a += b; }
template <class T> Grad<T> operator-(Grad<T> a, const Grad<T>& b) { return a -= b; }
template <class T> Grad<T> operator*(Grad<T> a, const Grad<T>& b) { return a *= b; }
template <class T> Grad<T> operator/(Grad<T> a, const Grad<T>& b) { return a /= b; }
template <class T> Grad<T> operator+(Grad<T> a, double c) { return a += c; }
template <class T> Grad<T> operator-(Grad<T> a, double c) { return a -= c; }
template <class T> Grad<T> operator*(Grad<T> a, double c) { return a *= c; }
template <class T> Grad<T> operator/(Grad<T> a, double c) { return a /= c; }
template <class T> Grad<T> operator+(double c, Grad<T> a) { return a += c; }
template <class T> Grad<T> operator-(double c, const Grad<T>& a) { return -a + c; }
template <class T> Grad<T> operator*(double c, Grad<T> a) { return a *= c; }
template <class T> Grad<T> operator/(double c, const Grad<T>& a) {
  return Grad<T>(constant_like(a.value(), c), a.size()) / a;
}

template <class T> double primal(const Grad<T>& x) { return primal(x.value()); }
template <class T> Grad<T> constant_like(const Grad<T>& proto, double c) {
  return Grad<T>(constant_like(proto.value(), c), proto.size());
}
template <class T> bool same_shape(const Grad<T>& a, const Grad<T>& b) {
  return a.size() == b.size() && same_shape(a.value(), b.value());
}
template <class T> bool all_finite(const Grad<T>& x) {
  if (!all_finite(x.value())) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!all_finite(x.d(i))) return false;
  return true;
}
template <class T> std::string shape_name(const Grad<T>& x) {
  return "grad" + std::to_string(x.size()) + "<" + shape_name(x.value()) + ">";
}

template <class T> Grad<T> sin(const Grad<T>& a) {
  using std::cos;
  using std::sin;
  return a.apply(sin(a.value()), cos(a.value()));
}
template <class T> Grad<T> cos(const Grad<T>& a) {
  using std::cos;
  using std::sin;
  return a.apply(cos(a.value()), -sin(a.value()));
}
template <class T> Grad<T> exp(const Grad<T>& a) {
  using std::exp;
  T e = exp(a.value());
  return a.apply(e, e);
}
template <class T> Grad<T> log(const Grad<T>& a) {
  using std::log;
  return a.apply(log(a.value()), 1.0 / a.value());
}
template <class T> Grad<T> sqrt(const Grad<T>& a) {
  using std::sqrt;
  T s = sqrt(a.value());
  return a.apply(s, 0.5 / s);
}
template <class T> Grad<T> tanh(const Grad<T>& a) {
  using std::tanh;
  T t = tanh(a.value());
  return a.apply(t, 1.0 - t * t);
}
template <class T> Grad<T> abs(const Grad<T>& a) { return primal(a) < 0.0 ? -a : a; }

/// x^n by repeated multiplication; exact for polynomial arguments.
template <class T> T pow_int(const T& x, unsigned n) {
  if (n == 0) return constant_like(x, 1.0);
  T r = x;
  for (unsigned i = 1; i < n; ++i) r = r * x;
  return r;
}

}  // namespace canard
