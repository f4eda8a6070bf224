#include "canard/linalg.hpp"

#include <cmath>
#include <utility>

namespace canard {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  a_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error("ragged matrix initializer");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::operator*(const Matrix& o) const {
  if (cols_ != o.rows_) throw Error("matrix product dimension mismatch");
  Matrix r(rows_, o.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k)
      for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += (*this)(i, k) * o(k, j);
  return r;
}

Matrix Matrix::operator*(double c) const {
  Matrix r = *this;
  for (double& v : r.a_) v *= c;
  return r;
}

std::vector<double> Matrix::operator*(std::span<const double> x) const {
  if (x.size() != cols_) throw Error("matrix-vector dimension mismatch");
  std::vector<double> y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
  return y;
}

double determinant(Matrix a) {
  if (!a.square()) throw Error("determinant of a non-square matrix");
  const std::size_t n = a.rows();
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) return 0.0;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      det = -det;
    }
    det *= a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

double determinant3(const Matrix& a) {
  if (a.rows() != 3 || a.cols() != 3) throw Error("determinant3 needs a 3x3 matrix");
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

double principal_minor_sum(const Matrix& a) {
  return (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) + (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) +
         (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0));
}

std::vector<double> solve(Matrix a, std::vector<double> b, double rel_tol) {
  if (!a.square() || a.rows() != b.size()) throw Error("solve dimension mismatch");
  const std::size_t n = a.rows();
  double scale = 0.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) throw NumericalError("singular linear system (zero matrix)");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) <= rel_tol * scale) throw NumericalError("singular linear system");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
    x[ii] = s / a(ii, ii);
  }
  return x;
}

}  // namespace canard
