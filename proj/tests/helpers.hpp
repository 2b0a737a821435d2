#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "cmix/data.hpp"
#include "cmix/labelprop.hpp"
#include "cmix/matrix.hpp"
#include "cmix/network.hpp"

namespace testutil {

/// Central finite differences of a scalar function w.r.t. one matrix.
inline cmix::Matrix fd_grad(const std::function<double()>& fn, cmix::Matrix& x,
                            double h = 1e-5) {
  cmix::Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x.data()[i];
    x.data()[i] = orig + h;
    const double fp = fn();
    x.data()[i] = orig - h;
    const double fm = fn();
    x.data()[i] = orig;
    g.data()[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Max relative error between two gradients, with an absolute floor for
/// near-zero entries.
inline double max_rel_err(const cmix::Matrix& a, const cmix::Matrix& b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a.data()[i]), std::abs(b.data()[i]), floor});
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / denom);
  }
  return worst;
}

inline cmix::Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& eng,
                                  double scale = 1.0) {
  cmix::Matrix m(r, c);
  std::normal_distribution<double> d(0.0, scale);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = d(eng);
  return m;
}

/// Two well-separated Gaussian blobs in 2-D: a transduction and end-to-end
/// pipeline fixture with a known Bayes-separable boundary.
inline cmix::TabularDataset two_blobs(std::size_t n_per_class, double separation, double sigma,
                                      std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  cmix::TabularDataset ds;
  ds.schema = {{"x0", cmix::ColumnKind::Continuous, 0}, {"x1", cmix::ColumnKind::Continuous, 0}};
  const std::size_t n = 2 * n_per_class;
  ds.continuous = cmix::Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = i < n_per_class ? 0 : 1;
    const double cx = cls == 0 ? 0.0 : separation;
    ds.continuous(i, 0) = cx + noise(eng);
    ds.continuous(i, 1) = noise(eng);
    ds.labels.push_back(cls);
    ds.row_ids.push_back(i);
  }
  return ds;
}

/// Dense solve of (I - alpha A) X = Y by Gaussian elimination with partial
/// pivoting; the independent oracle for the conjugate-gradient path.
inline cmix::Matrix dense_diffusion_solve(const cmix::Matrix& a_dense, double alpha,
                                          const cmix::Matrix& y) {
  const std::size_t n = a_dense.rows(), c = y.cols();
  cmix::Matrix m(n, n), x = y;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = (i == j ? 1.0 : 0.0) - alpha * a_dense(i, j);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(col, j), m(piv, j));
      for (std::size_t j = 0; j < c; ++j) std::swap(x(col, j), x(piv, j));
    }
    const double p = m(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m(r, col) / p;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) m(r, j) -= f * m(col, j);
      for (std::size_t j = 0; j < c; ++j) x(r, j) -= f * x(col, j);
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t j = 0; j < c; ++j) {
      double s = x(col, j);
      for (std::size_t k = col + 1; k < n; ++k) s -= m(col, k) * x(k, j);
      x(col, j) = s / m(col, col);
    }
  }
  return x;
}

inline cmix::Matrix to_dense(const cmix::SparseMatrix& a) {
  cmix::Matrix d(a.n, a.n);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t p = a.rowptr[i]; p < a.rowptr[i + 1]; ++p) d(i, a.colidx[p]) += a.vals[p];
  return d;
}

}  // namespace testutil
