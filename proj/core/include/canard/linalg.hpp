#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "canard/error.hpp"

namespace canard {

/// Small dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), a_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {a_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return a_; }

  double frobenius_norm() const;
  Matrix transposed() const;
  Matrix operator*(const Matrix& o) const;
  Matrix operator*(double c) const;
  std::vector<double> operator*(std::span<const double> x) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

/// Determinant by Gaussian elimination with partial pivoting.
double determinant(Matrix a);

/// Closed-form cofactor expansion of a 3x3 determinant.
double determinant3(const Matrix& a);

/// Sum of the principal 2x2 minors of a 3x3 matrix.
double principal_minor_sum(const Matrix& a);

/// Solve A x = b with partial pivoting; NumericalError when a pivot falls
/// below rel_tol * max|A|.
std::vector<double> solve(Matrix a, std::vector<double> b, double rel_tol = 1e-13);

/// Division-free Laplace expansion for an n x n matrix stored row-major.
/// Used for jet-valued entries where a pivot may have zero value.
template <class T>
T determinant_expansion(std::span<const T> m, std::size_t n) {
  if (n == 1) return m[0];
  if (n == 2) return m[0] * m[3] - m[1] * m[2];
  std::vector<T> minor((n - 1) * (n - 1));
  T acc{};
  bool first = true;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (j != col) minor[k++] = m[i * n + j];
    T term = m[col] * determinant_expansion<T>(minor, n - 1);
    if (first) {
      acc = (col % 2 == 0) ? term : -term;
      first = false;
    } else if (col % 2 == 0) {
      acc += term;
    } else {
      acc -= term;
    }
  }
  return acc;
}

}  // namespace canard
