#include "canard/diffgeo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace canard {

std::vector<double> VectorField::operator()(std::span<const double> x) const {
  std::vector<double> out(dim());
  eval(x, std::span<double>(out));
  return out;
}

template <class S>
std::vector<std::vector<S>> trajectory_jets(const VectorField& field, std::span<const S> point, std::size_t k) {
  const std::size_t n = field.dim();
  if (point.size() != n) throw Error("trajectory_jets: point has dimension " + std::to_string(point.size()) +
                                     ", field has " + std::to_string(n));
  if (k < 1 || k > kMaxTrajectoryOrder)
    throw Error("trajectory_jets: order " + std::to_string(k) + " outside [1, " +
                std::to_string(kMaxTrajectoryOrder) + "]");

  // coeff[j][i] is the j-th normalized Taylor coefficient of component i.
  std::vector<std::vector<S>> coeff(k + 1, std::vector<S>(n));
  for (std::size_t i = 0; i < n; ++i) coeff[0][i] = point[i];

  std::vector<Taylor<S>> x(n), out(n);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = Taylor<S>(coeff[0][i], j);
      for (std::size_t m = 1; m <= j; ++m) x[i][m] = coeff[m][i];
    }
    field.eval(std::span<const Taylor<S>>(x), std::span<Taylor<S>>(out));
    for (std::size_t i = 0; i < n; ++i) {
      if (out[i].order() != j) throw ShapeError("vector field returned a series of the wrong order");
      coeff[j + 1][i] = out[i][j] / static_cast<double>(j + 1);
    }
  }

  double factorial = 1.0;
  for (std::size_t j = 1; j <= k; ++j) {
    factorial *= static_cast<double>(j);
    for (std::size_t i = 0; i < n; ++i) coeff[j][i] *= factorial;
  }
  return coeff;
}

template std::vector<std::vector<double>> trajectory_jets<double>(const VectorField&, std::span<const double>,
                                                                  std::size_t);
template std::vector<std::vector<Jet2>> trajectory_jets<Jet2>(const VectorField&, std::span<const Jet2>,
                                                              std::size_t);

std::vector<std::vector<double>> trajectory_jets(const VectorField& field, std::span<const double> point,
                                                 std::size_t k) {
  return trajectory_jets<double>(field, point, k);
}

Matrix jacobian(const VectorField& field, std::span<const double> point) {
  const std::size_t n = field.dim();
  if (point.size() != n) throw Error("jacobian: dimension mismatch");
  std::vector<Jet2> x(n), out(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = Jet2::variable(point[i], n, i);
  field.eval(std::span<const Jet2>(x), std::span<Jet2>(out));
  Matrix j(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) j(r, c) = out[r].d(c);
  return j;
}

SecondOrder value_gradient_hessian(const ScalarField& fn, std::span<const double> point) {
  const std::size_t n = fn.dim();
  if (point.size() != n) throw Error("hessian: dimension mismatch");
  std::vector<Jet2> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = Jet2::variable(point[i], n, i);
  const Jet2 y = fn.eval(std::span<const Jet2>(x));
  SecondOrder r;
  r.value = y.value();
  r.gradient.resize(n);
  r.hessian = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    r.gradient[i] = y.d(i);
    for (std::size_t j = 0; j < n; ++j) r.hessian(i, j) = y.dd(i, j);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double avg = 0.5 * (r.hessian(i, j) + r.hessian(j, i));
      r.hessian(i, j) = r.hessian(j, i) = avg;
    }
  return r;
}

std::vector<double> gradient(const ScalarField& fn, std::span<const double> point) {
  return value_gradient_hessian(fn, point).gradient;
}

Matrix hessian(const ScalarField& fn, std::span<const double> point) {
  return value_gradient_hessian(fn, point).hessian;
}

// ---------------------------------------------------------------------------

Matrix balance(const Matrix& a) {
  Matrix b = a;
  const std::size_t n = b.rows();
  constexpr double radix = 2.0;
  bool done = false;
  for (int sweep = 0; sweep < 50 && !done; ++sweep) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) {
          c += std::abs(b(j, i));
          r += std::abs(b(i, j));
        }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        for (std::size_t j = 0; j < n; ++j) b(i, j) /= f;
        for (std::size_t j = 0; j < n; ++j) b(j, i) *= f;
      }
    }
  }
  return b;
}

namespace {

using cd = std::complex<double>;

cd char_poly(const std::vector<double>& coeffs, cd x, cd* deriv) {
  // coeffs: monic, highest degree first after the implicit leading 1.
  cd p = 1.0, dp = 0.0;
  for (double c : coeffs) {
    dp = dp * x + p;
    p = p * x + c;
  }
  if (deriv) *deriv = dp;
  return p;
}

void polish(std::vector<cd>& roots, const std::vector<double>& coeffs) {
  for (cd& r : roots) {
    for (int it = 0; it < 3; ++it) {
      cd dp;
      const cd p = char_poly(coeffs, r, &dp);
      if (dp == 0.0) break;
      const cd next = r - p / dp;
      if (std::abs(char_poly(coeffs, next, nullptr)) < std::abs(p)) {
        r = next;
      } else {
        break;
      }
    }
  }
}

std::vector<cd> quadratic_roots(double trace, double det) {
  const double half = 0.5 * trace;
  const double disc = half * half - det;
  if (disc >= 0.0) {
    const double big = half + std::copysign(std::sqrt(disc), half == 0.0 ? 1.0 : half);
    const double small = big != 0.0 ? det / big : 0.0;
    return {cd(big, 0.0), cd(small, 0.0)};
  }
  const double im = std::sqrt(-disc);
  return {cd(half, im), cd(half, -im)};
}

std::vector<cd> cubic_roots(double trace, double s, double det) {
  const double shift = trace / 3.0;
  const double p = s - trace * trace / 3.0;
  const double q = -2.0 * trace * trace * trace / 27.0 + trace * s / 3.0 - det;
  const double r = 4.0 * p * p * p + 27.0 * q * q;
  std::vector<cd> roots;
  if (r < 0.0) {
    // Three distinct real roots: trigonometric form.
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp((3.0 * q / (2.0 * p)) * std::sqrt(-3.0 / p), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots.emplace_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift, 0.0);
  } else {
    // One real root plus a (possibly degenerate) complex pair: Cardano.
    const double d = std::sqrt(r / 108.0);
    const double big = -std::copysign(std::cbrt(std::abs(q) / 2.0 + d), q == 0.0 ? 1.0 : q);
    const double other = big != 0.0 ? -p / (3.0 * big) : 0.0;
    const double t1 = big + other;
    const double re = -0.5 * t1;
    const double im = 0.5 * std::sqrt(3.0) * (big - other);
    roots.emplace_back(t1 + shift, 0.0);
    roots.emplace_back(re + shift, std::abs(im));
    roots.emplace_back(re + shift, -std::abs(im));
  }
  return roots;
}

void sort_eigenvalues(std::vector<cd>& v) {
  std::sort(v.begin(), v.end(), [](cd a, cd b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

double tolerance_for(const Matrix& a) { return kEigenRelTol * (1.0 + a.frobenius_norm()); }

Classification classify_by_eigenvalues(const std::vector<cd>& eig, double tol) {
  std::vector<double> reals;
  bool complex_pair = false;
  for (const cd& l : eig) {
    if (std::abs(l.imag()) <= tol) {
      reals.push_back(l.real());
    } else {
      complex_pair = true;
    }
  }
  std::size_t zeros = 0, pos = 0, neg = 0;
  for (double r : reals) {
    if (std::abs(r) <= tol) {
      ++zeros;
    } else if (r > 0.0) {
      ++pos;
    } else {
      ++neg;
    }
  }
  if (complex_pair) return zeros == 0 ? Classification::Focus : Classification::Indeterminate;
  if (zeros == 0) return (pos > 0 && neg > 0) ? Classification::Saddle : Classification::Node;
  if (zeros == 1 && eig.size() == 3 && pos == 1 && neg == 1) return Classification::DegenerateSaddle;
  return Classification::Indeterminate;
}

}  // namespace

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::Saddle: return "Saddle";
    case Classification::DegenerateSaddle: return "DegenerateSaddle";
    case Classification::Node: return "Node";
    case Classification::Focus: return "Focus";
    case Classification::Indeterminate: return "Indeterminate";
  }
  return "?";
}

std::vector<std::complex<double>> eigen_small(const Matrix& a) {
  if (!a.square() || (a.rows() != 2 && a.rows() != 3)) throw Error("eigen_small expects a 2x2 or 3x3 matrix");
  for (double v : a.data())
    if (!std::isfinite(v)) throw NumericalError("eigen_small: non-finite matrix entry");
  const Matrix b = balance(a);
  std::vector<cd> roots;
  std::vector<double> coeffs;
  if (b.rows() == 2) {
    const double tr = b(0, 0) + b(1, 1);
    const double det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    roots = quadratic_roots(tr, det);
    coeffs = {-tr, det};
  } else {
    const double tr = b(0, 0) + b(1, 1) + b(2, 2);
    const double s = principal_minor_sum(b);
    const double det = determinant3(b);
    roots = cubic_roots(tr, s, det);
    coeffs = {-tr, s, -det};
  }
  polish(roots, coeffs);
  const double tol = tolerance_for(a);
  for (cd& r : roots)
    if (std::abs(r.imag()) <= tol) r = cd(r.real(), 0.0);
  sort_eigenvalues(roots);
  return roots;
}

SpectrumReport spectrum(const Matrix& a) {
  if (!a.square() || (a.rows() != 2 && a.rows() != 3)) throw Error("spectrum expects a 2x2 or 3x3 matrix");
  SpectrumReport rep;
  rep.dimension = a.rows();
  rep.zero_tolerance = tolerance_for(a);
  rep.eigenvalues = eigen_small(a);
  const double tol = rep.zero_tolerance;

  bool has_zero = false;
  for (const cd& l : rep.eigenvalues)
    if (std::abs(l) <= tol) has_zero = true;

  if (rep.dimension == 2) {
    rep.trace = a(0, 0) + a(1, 1);
    rep.determinant = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double half_sq = 0.25 * rep.trace * rep.trace;
    const double gap = half_sq - rep.determinant;
    if (has_zero) {
      rep.classification = Classification::Indeterminate;
    } else if (rep.determinant < 0.0) {
      rep.classification = Classification::Saddle;
    } else if (std::abs(gap) <= kEigenRelTol * (half_sq + std::abs(rep.determinant))) {
      rep.classification = Classification::Indeterminate;
    } else {
      rep.classification = gap > 0.0 ? Classification::Node : Classification::Focus;
    }
  } else {
    const double t = a(0, 0) + a(1, 1) + a(2, 2);
    const double s = principal_minor_sum(a);
    const double d = determinant3(a);
    const double p = s - t * t / 3.0;
    const double q = -2.0 * t * t * t / 27.0 + t * s / 3.0 - d;
    const double r = 4.0 * p * p * p + 27.0 * q * q;
    rep.trace = t;
    rep.determinant = d;
    rep.minor_sum = s;
    rep.p = p;
    rep.q = q;
    rep.discriminant = r;
    const double norm = a.frobenius_norm();
    if (has_zero) {
      rep.classification =
          s < -tol * (1.0 + norm) ? Classification::DegenerateSaddle : Classification::Indeterminate;
    } else if (std::abs(r) <= kEigenRelTol * (std::abs(4.0 * p * p * p) + 27.0 * q * q)) {
      rep.classification = Classification::Indeterminate;
    } else if (r < 0.0) {
      if (d < 0.0 && s < t * t / 3.0) {
        rep.classification = Classification::Saddle;
      } else if (d > 0.0) {
        rep.classification = Classification::Node;
      } else {
        rep.classification = Classification::Indeterminate;
      }
    } else {
      rep.classification = Classification::Focus;
    }
  }
  rep.eigen_classification = classify_by_eigenvalues(rep.eigenvalues, tol);
  rep.criteria_consistent = rep.classification == rep.eigen_classification;
  return rep;
}

}  // namespace canard
