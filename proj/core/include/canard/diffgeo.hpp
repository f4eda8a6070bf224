#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "canard/jet.hpp"
#include "canard/linalg.hpp"

namespace canard {

/// Autonomous vector field F: R^n -> R^n evaluable over every scalar type the
/// derivative machinery needs. Implementations must be pure unless documented.
class VectorField {
 public:
  virtual ~VectorField() = default;

  virtual std::size_t dim() const = 0;
  virtual void eval(std::span<const double> x, std::span<double> out) const = 0;
  virtual void eval(std::span<const Jet2> x, std::span<Jet2> out) const = 0;
  virtual void eval(std::span<const Taylor<double>> x, std::span<Taylor<double>> out) const = 0;
  virtual void eval(std::span<const Taylor<Jet2>> x, std::span<Taylor<Jet2>> out) const = 0;

  std::vector<double> operator()(std::span<const double> x) const;
};

/// Scalar function R^n -> R evaluable over reals and second-order jets.
class ScalarField {
 public:
  virtual ~ScalarField() = default;

  virtual std::size_t dim() const = 0;
  virtual double eval(std::span<const double> x) const = 0;
  virtual Jet2 eval(std::span<const Jet2> x) const = 0;
};

namespace detail {

template <class Fn>
class LambdaVectorField final : public VectorField {
 public:
  LambdaVectorField(std::size_t n, Fn fn) : n_(n), fn_(std::move(fn)) {}
  std::size_t dim() const override { return n_; }
  void eval(std::span<const double> x, std::span<double> out) const override { fn_(x, out); }
  void eval(std::span<const Jet2> x, std::span<Jet2> out) const override { fn_(x, out); }
  void eval(std::span<const Taylor<double>> x, std::span<Taylor<double>> out) const override { fn_(x, out); }
  void eval(std::span<const Taylor<Jet2>> x, std::span<Taylor<Jet2>> out) const override { fn_(x, out); }

 private:
  std::size_t n_;
  Fn fn_;
};

template <class Fn>
class LambdaScalarField final : public ScalarField {
 public:
  LambdaScalarField(std::size_t n, Fn fn) : n_(n), fn_(std::move(fn)) {}
  std::size_t dim() const override { return n_; }
  double eval(std::span<const double> x) const override { return fn_(x); }
  Jet2 eval(std::span<const Jet2> x) const override { return fn_(x); }

 private:
  std::size_t n_;
  Fn fn_;
};

}  // namespace detail

/// Wrap a generic callable `fn(std::span<const T> x, std::span<T> out)`.
template <class Fn>
std::shared_ptr<const VectorField> make_vector_field(std::size_t dim, Fn fn) {
  return std::make_shared<detail::LambdaVectorField<Fn>>(dim, std::move(fn));
}

/// Wrap a generic callable `T fn(std::span<const T> x)`.
template <class Fn>
std::shared_ptr<const ScalarField> make_scalar_field(std::size_t dim, Fn fn) {
  return std::make_shared<detail::LambdaScalarField<Fn>>(dim, std::move(fn));
}

inline constexpr std::size_t kMaxTrajectoryOrder = 6;

/// Time derivatives [X, X', ..., X^(k)] of the solution through `point`,
/// computed by the Taylor recurrence c_{j+1} = [F(c_0 + ... + c_j t^j)]_j / (j+1).
/// S is double or Jet2; with Jet2 every derivative carries its own spatial
/// gradient and Hessian.
template <class S>
std::vector<std::vector<S>> trajectory_jets(const VectorField& field, std::span<const S> point, std::size_t k);

std::vector<std::vector<double>> trajectory_jets(const VectorField& field, std::span<const double> point,
                                                 std::size_t k);

/// Exact Jacobian, entry (i, j) = dF_i/dx_j.
Matrix jacobian(const VectorField& field, std::span<const double> point);

struct SecondOrder {
  double value = 0.0;
  std::vector<double> gradient;
  Matrix hessian;
};

SecondOrder value_gradient_hessian(const ScalarField& fn, std::span<const double> point);
std::vector<double> gradient(const ScalarField& fn, std::span<const double> point);
Matrix hessian(const ScalarField& fn, std::span<const double> point);

// ---------------------------------------------------------------------------
// Small-matrix spectra
// ---------------------------------------------------------------------------

/// Relative threshold for "real" and "zero" eigenvalue decisions, scaled by 1 + ||A||_F.
inline constexpr double kEigenRelTol = 1e-9;

/// Eigenvalues of a 2x2 or 3x3 real matrix from the closed-form characteristic
/// polynomial (balanced first; trigonometric method for three real roots,
/// Cardano otherwise), polished by Newton, sorted by real part then imaginary
/// part, both descending.
std::vector<std::complex<double>> eigen_small(const Matrix& a);

enum class Classification { Saddle, DegenerateSaddle, Node, Focus, Indeterminate };
std::string_view to_string(Classification c);

struct SpectrumReport {
  std::size_t dimension = 0;
  double determinant = 0.0;  // Delta
  double trace = 0.0;        // T
  std::optional<double> minor_sum;      // S, 3x3 only
  std::optional<double> p;              // S - T^2/3
  std::optional<double> q;              // -2T^3/27 + TS/3 - Delta
  std::optional<double> discriminant;   // R = 4P^3 + 27Q^2
  std::vector<std::complex<double>> eigenvalues;
  Classification classification = Classification::Indeterminate;  // from the invariant inequalities
  Classification eigen_classification = Classification::Indeterminate;  // from the eigenvalue sign pattern
  bool criteria_consistent = true;
  double zero_tolerance = 0.0;
};

/// Invariants, eigenvalues, and equilibrium type of a 2x2 or 3x3 Jacobian.
SpectrumReport spectrum(const Matrix& a);

/// Diagonal similarity scaling by powers of two (Parlett-Reinsch).
Matrix balance(const Matrix& a);

}  // namespace canard
