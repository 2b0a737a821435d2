#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cmix/errors.hpp"
#include "cmix/matrix.hpp"
#include "cmix/network.hpp"

namespace cmix {

/// Denominator convention for the supervised contrastive loss.
/// PaperWithPositive sums over different-label rows plus the current
/// positive, making each log term a proper softmax and keeping it bounded.
/// SupCon is the standard all-rows-but-anchor form.
enum class SupConDenominator { PaperWithPositive, SupCon };

struct SupConResult {
  double loss = 0.0;
  Matrix dview1, dview2;
};

namespace detail {

struct SupConPooled {
  double loss = 0.0;
  Matrix dV;
};

/// Core of the contrastive loss over a pooled batch V (m x d): cosine
/// similarity on L2-normalized rows divided by tau, positives given as an
/// explicit weight matrix (zero diagonal), negatives are the zero-weight
/// off-diagonal entries. Anchor contributions are normalized by their total
/// positive weight, optionally scaled per-anchor, and the sum is divided by
/// the anchor count.
inline SupConPooled supcon_pooled(const Matrix& v, const Matrix& pos_w, double tau,
                                  SupConDenominator den,
                                  const std::vector<double>& anchor_scale) {
  if (tau <= 0.0) throw ConfigError("temperature must be positive");
  const std::size_t m = v.rows(), d = v.cols();
  if (pos_w.rows() != m || pos_w.cols() != m)
    throw ShapeMismatchError("supcon: positive-weight matrix misaligned");

  Matrix u(m, d);
  std::vector<double> norm(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += v(i, j) * v(i, j);
    norm[i] = std::sqrt(s);
    if (norm[i] > 1e-12)
      for (std::size_t j = 0; j < d; ++j) u(i, j) = v(i, j) / norm[i];
  }

  Matrix sim = matmul_nt(u, u);  // cosine; divide by tau on use
  const double shift = 1.0 / tau;  // sim/tau <= 1/tau, so exp(.-shift) <= 1

  SupConPooled out;
  Matrix dS(m, m);  // d loss / d (sim/tau)
  for (std::size_t i = 0; i < m; ++i) {
    double wsum = 0.0;
    for (std::size_t p = 0; p < m; ++p) wsum += pos_w(i, p);
    if (wsum <= 0.0) continue;  // anchor with no positives contributes 0
    const double scale = anchor_scale[i] / (wsum * static_cast<double>(m));

    std::vector<double> e(m);
    double neg_sum = 0.0, all_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      e[j] = std::exp(sim(i, j) / tau - shift);
      all_sum += e[j];
      if (pos_w(i, j) == 0.0) neg_sum += e[j];
    }

    double spread = 0.0;  // total weight pushed onto the denominator terms
    for (std::size_t p = 0; p < m; ++p) {
      const double w = pos_w(i, p);
      if (w == 0.0) continue;
      const double c = scale * w;
      const double denom = den == SupConDenominator::SupCon ? all_sum : neg_sum + e[p];
      out.loss += c * (-(sim(i, p) / tau - shift) + std::log(denom));
      if (den == SupConDenominator::SupCon) {
        dS(i, p) += -c;
        spread += c / denom;
      } else {
        dS(i, p) += c * (e[p] / denom - 1.0);
        spread += c / denom;
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      if (den == SupConDenominator::SupCon)
        dS(i, j) += spread * e[j];
      else if (pos_w(i, j) == 0.0)
        dS(i, j) += spread * e[j];
    }
  }

  // dU = (dS + dS^T) U / tau, then back through the row normalization.
  Matrix c(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) c(i, j) = (dS(i, j) + dS(j, i)) / tau;
  Matrix du = matmul(c, u);
  out.dV = Matrix(m, d);
  for (std::size_t i = 0; i < m; ++i) {
    if (norm[i] <= 1e-12) continue;
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += du(i, j) * u(i, j);
    for (std::size_t j = 0; j < d; ++j) out.dV(i, j) = (du(i, j) - dot * u(i, j)) / norm[i];
  }
  return out;
}

inline SupConResult split_views(SupConPooled&& pooled, std::size_t n1, std::size_t d) {
  SupConResult out;
  out.loss = pooled.loss;
  const std::size_t m = pooled.dV.rows();
  out.dview1 = Matrix(n1, d);
  out.dview2 = Matrix(m - n1, d);
  for (std::size_t i = 0; i < m; ++i) {
    auto src = pooled.dV.row(i);
    auto dst = i < n1 ? out.dview1.row(i) : out.dview2.row(i - n1);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

}  // namespace detail

/// Supervised contrastive loss over the pooled multiview batch
/// I = view1 (unmixed projections) + view2 (mixed projections). Positives
/// are same-label members of I minus the anchor; anchors may carry per-row
/// weights (pseudo-labeled rows enter with weight gamma).
inline SupConResult supcon_loss(const Matrix& view1, const Matrix& view2,
                                const std::vector<int>& labels, double tau,
                                SupConDenominator den = SupConDenominator::PaperWithPositive,
                                const std::vector<double>* anchor_weights = nullptr) {
  const std::size_t n = view1.rows();
  if (view2.rows() != n || view1.cols() != view2.cols())
    throw ShapeMismatchError("supcon: views misaligned");
  if (labels.size() != n) throw ShapeMismatchError("supcon: labels misaligned");
  if (n == 0) throw DegenerateBatchError("supcon: empty batch");
  if (std::all_of(labels.begin(), labels.end(), [&](int y) { return y == labels[0]; }))
    throw DegenerateBatchError("supcon: all labels equal, no negatives");

  const std::size_t m = 2 * n;
  Matrix v = Matrix::vcat(view1, view2);
  Matrix pos_w(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && labels[i % n] == labels[j % n]) pos_w(i, j) = 1.0;

  std::vector<double> scale(m, 1.0);
  if (anchor_weights) {
    if (anchor_weights->size() != n) throw ShapeMismatchError("supcon: anchor weights misaligned");
    for (std::size_t i = 0; i < m; ++i) scale[i] = (*anchor_weights)[i % n];
  }
  return detail::split_views(detail::supcon_pooled(v, pos_w, tau, den, scale), n,
                             view1.cols());
}

/// Random-mixing variant for the ablation: mixed row k is positive to its
/// parents only, with weights lambda (its own row) and 1-lambda (its
/// partner); everything else is a negative.
inline SupConResult random_mix_contrastive_loss(const Matrix& view1, const Matrix& view2,
                                                const std::vector<std::size_t>& partner,
                                                const std::vector<double>& lambda, double tau,
                                                SupConDenominator den =
                                                    SupConDenominator::PaperWithPositive,
                                                const std::vector<double>* anchor_weights =
                                                    nullptr) {
  const std::size_t n = view1.rows();
  if (view2.rows() != n || partner.size() != n || lambda.size() != n)
    throw ShapeMismatchError("random_mix contrastive: inputs misaligned");
  if (n < 2) throw DegenerateBatchError("random_mix contrastive: need at least 2 rows");

  const std::size_t m = 2 * n;
  Matrix v = Matrix::vcat(view1, view2);
  Matrix pos_w(m, m);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t mixed = n + k;
    pos_w(mixed, k) += lambda[k];
    pos_w(k, mixed) += lambda[k];
    pos_w(mixed, partner[k]) += 1.0 - lambda[k];
    pos_w(partner[k], mixed) += 1.0 - lambda[k];
  }
  std::vector<double> scale(m, 1.0);
  if (anchor_weights) {
    if (anchor_weights->size() != n)
      throw ShapeMismatchError("random_mix contrastive: anchor weights misaligned");
    for (std::size_t i = 0; i < m; ++i) scale[i] = (*anchor_weights)[i % n];
  }
  return detail::split_views(detail::supcon_pooled(v, pos_w, tau, den, scale), n,
                             view1.cols());
}

// ---- reconstruction ------------------------------------------------------

struct ReconResult {
  double loss = 0.0;
  Matrix draw;  // gradient w.r.t. the decoder's raw head output
};

/// Feature reconstruction loss: weighted squared error on continuous
/// columns plus weighted negative log-likelihood on categorical columns
/// (softmax over each logit block), batch-mean over rows. Default weights
/// are |C|/d and |D|/d with d = |C| + |D|.
inline ReconResult reconstruction_loss(const Matrix& raw, const Decoder& dec,
                                       const Matrix& target_cont, const IntMatrix& target_cat,
                                       double w_cont, double w_cat) {
  const std::size_t n = raw.rows();
  if (target_cont.rows() != n || target_cont.cols() != dec.n_cont)
    throw ShapeMismatchError("reconstruction: continuous target misaligned");
  if (!dec.cat_cards.empty() && target_cat.size() != n)
    throw ShapeMismatchError("reconstruction: categorical target misaligned");

  ReconResult out;
  out.draw = Matrix(raw.rows(), raw.cols());
  if (n == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dec.n_cont; ++j) {
      const double diff = raw(i, j) - target_cont(i, j);
      out.loss += w_cont * diff * diff * inv_n;
      out.draw(i, j) = 2.0 * w_cont * diff * inv_n;
    }

  std::size_t off = dec.n_cont;
  for (std::size_t c = 0; c < dec.cat_cards.size(); ++c) {
    const std::size_t card = dec.cat_cards[c];
    for (std::size_t i = 0; i < n; ++i) {
      double mx = raw(i, off);
      for (std::size_t k = 1; k < card; ++k) mx = std::max(mx, raw(i, off + k));
      double s = 0.0;
      for (std::size_t k = 0; k < card; ++k) s += std::exp(raw(i, off + k) - mx);
      const std::size_t truth = target_cat[i][c];
      if (truth >= card) throw IndexOutOfRangeError("reconstruction: category index out of range");
      const double p_true = std::exp(raw(i, off + truth) - mx) / s;
      out.loss += w_cat * -std::log(std::max(p_true, 1e-12)) * inv_n;
      for (std::size_t k = 0; k < card; ++k) {
        const double p = std::exp(raw(i, off + k) - mx) / s;
        out.draw(i, off + k) = w_cat * (p - (k == truth ? 1.0 : 0.0)) * inv_n;
      }
    }
    off += card;
  }
  return out;
}

// ---- cross-entropy -------------------------------------------------------

struct CeResult {
  double loss = 0.0;
  Matrix dlogits;
};

namespace detail {

inline Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    double mx = logits(i, 0);
    for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) s += std::exp(logits(i, j) - mx);
    for (std::size_t j = 0; j < logits.cols(); ++j) p(i, j) = std::exp(logits(i, j) - mx) / s;
  }
  return p;
}

}  // namespace detail

/// Mean over rows of -log softmax(logits)[target].
inline CeResult cross_entropy(const Matrix& logits, const std::vector<int>& targets) {
  const std::size_t n = logits.rows();
  if (targets.size() != n) throw ShapeMismatchError("cross_entropy: targets misaligned");
  CeResult out;
  out.dlogits = Matrix(n, logits.cols());
  if (n == 0) return out;
  Matrix p = detail::softmax_rows(logits);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = static_cast<std::size_t>(targets[i]);
    if (t >= logits.cols()) throw IndexOutOfRangeError("cross_entropy: target out of range");
    out.loss += -std::log(std::max(p(i, t), 1e-12)) * inv_n;
    for (std::size_t j = 0; j < logits.cols(); ++j)
      out.dlogits(i, j) = (p(i, j) - (j == t ? 1.0 : 0.0)) * inv_n;
  }
  return out;
}

/// Soft-target variant for Mixup: mean over rows of sum_k t_k * -log
/// softmax_k. With one-hot rows this equals cross_entropy exactly.
inline CeResult soft_cross_entropy(const Matrix& logits, const Matrix& targets) {
  const std::size_t n = logits.rows();
  if (!targets.same_shape(logits)) throw ShapeMismatchError("soft_cross_entropy: shape mismatch");
  CeResult out;
  out.dlogits = Matrix(n, logits.cols());
  if (n == 0) return out;
  Matrix p = detail::softmax_rows(logits);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double tsum = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      out.loss += targets(i, j) * -std::log(std::max(p(i, j), 1e-12)) * inv_n;
      tsum += targets(i, j);
    }
    for (std::size_t j = 0; j < logits.cols(); ++j)
      out.dlogits(i, j) = (tsum * p(i, j) - targets(i, j)) * inv_n;
  }
  return out;
}

}  // namespace cmix
