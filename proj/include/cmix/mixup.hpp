#pragma once

#include <map>
#include <random>
#include <vector>

#include "cmix/errors.hpp"
#include "cmix/matrix.hpp"
#include "cmix/rng.hpp"

namespace cmix {

struct MixupResult {
  Matrix mixed;                      // row i = lambda[i]*h[i] + (1-lambda[i])*h[partner[i]]
  std::vector<std::size_t> partner;  // mix partner per row
  std::vector<double> lambda;
};

/// Per-row interpolation weights, i.i.d. Uniform(0, alpha).
inline std::vector<double> sample_lambda(double alpha, std::size_t n, std::mt19937_64& eng) {
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("mixup alpha must be in [0, 1]");
  std::vector<double> out(n);
  std::uniform_real_distribution<double> d(0.0, alpha);
  for (auto& v : out) v = alpha > 0.0 ? d(eng) : 0.0;
  return out;
}

namespace detail {

inline Matrix interpolate(const Matrix& h, const std::vector<std::size_t>& partner,
                          const std::vector<double>& lambda) {
  Matrix out(h.rows(), h.cols());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const double l = lambda[i];
    const auto a = h.row(i);
    const auto b = h.row(partner[i]);
    auto o = out.row(i);
    for (std::size_t j = 0; j < h.cols(); ++j) o[j] = l * a[j] + (1.0 - l) * b[j];
  }
  return out;
}

}  // namespace detail

/// Pairs each row with a uniformly drawn other row of the same label (a
/// random within-class derangement; a class with a single batch member
/// self-mixes, which leaves that row unchanged). The mixed row carries the
/// pair's shared label.
inline MixupResult within_class_mixup(const Matrix& h, const std::vector<int>& labels,
                                      std::vector<double> lambda, std::mt19937_64& eng) {
  if (h.rows() != labels.size() || h.rows() != lambda.size())
    throw ShapeMismatchError("within_class_mixup: rows/labels/lambda misaligned");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  std::vector<std::size_t> partner(h.rows());
  for (auto& [label, rows] : by_class) {
    if (rows.size() == 1) {
      partner[rows[0]] = rows[0];
      continue;
    }
    // random cyclic shift of a shuffled order: a derangement within the class
    auto order = rows;
    shuffle_inplace(order, eng);
    for (std::size_t k = 0; k < order.size(); ++k)
      partner[order[k]] = order[(k + 1) % order.size()];
  }
  MixupResult out;
  out.mixed = detail::interpolate(h, partner, lambda);
  out.partner = std::move(partner);
  out.lambda = std::move(lambda);
  return out;
}

/// Pairs each row with a uniformly drawn other row regardless of label; the
/// returned lambdas let the caller form soft targets (lambda to the row's
/// own label, 1-lambda to the partner's).
inline MixupResult random_mixup(const Matrix& h, std::vector<double> lambda,
                                std::mt19937_64& eng) {
  const std::size_t n = h.rows();
  if (n < 2) throw TooFewPointsError("random_mixup needs at least 2 rows");
  if (n != lambda.size()) throw ShapeMismatchError("random_mixup: lambda misaligned");
  std::vector<std::size_t> partner(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> d(0, n - 2);
    std::size_t p = d(eng);
    if (p >= i) ++p;
    partner[i] = p;
  }
  MixupResult out;
  out.mixed = detail::interpolate(h, partner, lambda);
  out.partner = std::move(partner);
  out.lambda = std::move(lambda);
  return out;
}

}  // namespace cmix
