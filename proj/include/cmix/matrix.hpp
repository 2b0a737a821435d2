#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cmix/errors.hpp"

namespace cmix {

/// Dense row-major matrix of doubles. The universal carrier for features,
/// activations and gradients.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::size_t rows, std::size_t cols,
                          std::vector<double> data) {
    if (data.size() != rows * cols) throw ShapeMismatchError("from_rows: data length mismatch");
    Matrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.data_ = std::move(data);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  Matrix& operator+=(const Matrix& o) {
    require_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  void check_finite(const char* what) const {
    for (double v : data_)
      if (!std::isfinite(v)) throw NonFiniteError(std::string("non-finite value in ") + what);
  }

  /// Select rows by index, in the given order.
  Matrix gather(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t r = 0; r < idx.size(); ++r)
      std::copy_n(data_.data() + idx[r] * cols_, cols_, out.data() + r * cols_);
    return out;
  }

  /// Columns [c0, c1) as a new matrix.
  Matrix slice_cols(std::size_t c0, std::size_t c1) const {
    Matrix out(rows_, c1 - c0);
    for (std::size_t i = 0; i < rows_; ++i)
      std::copy_n(data_.data() + i * cols_ + c0, c1 - c0, out.data() + i * out.cols_);
    return out;
  }

  /// Stack two matrices vertically.
  static Matrix vcat(const Matrix& a, const Matrix& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.cols_ != b.cols_) throw ShapeMismatchError("vcat: column mismatch");
    Matrix out(a.rows_ + b.rows_, a.cols_);
    std::copy(a.data_.begin(), a.data_.end(), out.data_.begin());
    std::copy(b.data_.begin(), b.data_.end(), out.data_.begin() + a.data_.size());
    return out;
  }

 private:
  void require_shape(const Matrix& o) const {
    if (!same_shape(o)) throw ShapeMismatchError("matrix shape mismatch");
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

/// C = A * B. Plain ikj loop; deterministic and fast enough at desk scale.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeMismatchError("matmul: inner dimension mismatch");
  Matrix c(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      const double av = pa[i * k + l];
      if (av == 0.0) continue;
      const double* br = pb + l * m;
      double* cr = pc + i * m;
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  return c;
}

/// C = A^T * B (A is n x p, B is n x m, C is p x m).
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeMismatchError("matmul_tn: row mismatch");
  Matrix c(a.cols(), b.cols());
  const std::size_t n = a.rows(), p = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < p; ++l) {
      const double av = a(i, l);
      if (av == 0.0) continue;
      const double* br = b.data() + i * m;
      double* cr = c.data() + l * m;
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  return c;
}

/// C = A * B^T (A is n x p, B is m x p, C is n x m).
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeMismatchError("matmul_nt: column mismatch");
  Matrix c(a.rows(), b.rows());
  const std::size_t n = a.rows(), p = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double* ar = a.data() + i * p;
      const double* br = b.data() + j * p;
      double s = 0.0;
      for (std::size_t l = 0; l < p; ++l) s += ar[l] * br[l];
      c(i, j) = s;
    }
  return c;
}

}  // namespace cmix
