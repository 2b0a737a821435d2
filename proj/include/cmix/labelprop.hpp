#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cmix/errors.hpp"
#include "cmix/matrix.hpp"

namespace cmix {

enum class GraphSimilarity {
  ClippedCosineCubed,  // max(0, cosine)^3; keeps weights nonnegative
  Dot,
};

inline double graph_similarity(GraphSimilarity sim, std::span<const double> a,
                               std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (sim == GraphSimilarity::Dot) return dot;
  const double denom = std::sqrt(na) * std::sqrt(nb);
  const double cos = denom > 1e-300 ? dot / denom : 0.0;
  const double c = std::max(0.0, cos);
  return c * c * c;
}

/// Directed kNN affinity rows: row i holds similarities to its k most
/// similar neighbors (ties broken by lower index), zero diagonal.
struct AffinityGraph {
  std::size_t n = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
};

inline AffinityGraph knn_graph(const Matrix& z, std::size_t k,
                               GraphSimilarity sim = GraphSimilarity::ClippedCosineCubed) {
  const std::size_t n = z.rows();
  if (n < k + 1) throw TooFewPointsError("knn_graph: need at least k+1 points");
  AffinityGraph g;
  g.n = n;
  g.rows.resize(n);
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.push_back({graph_similarity(sim, z.row(i), z.row(j)), j});
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    for (std::size_t t = 0; t < k; ++t) g.rows[i].push_back({cand[t].second, cand[t].first});
    std::sort(g.rows[i].begin(), g.rows[i].end());
  }
  return g;
}

/// Symmetric sparse matrix in CSR form.
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> rowptr, colidx;
  std::vector<double> vals;

  void matvec(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t p = rowptr[i]; p < rowptr[i + 1]; ++p) s += vals[p] * x[colidx[p]];
      y[i] = s;
    }
  }
};

/// W = G^T + G, D = diag(W 1), A = D^{-1/2} W D^{-1/2}. Isolated nodes
/// (zero degree) get zero rows; spectral radius of A is at most 1.
inline SparseMatrix normalize_adjacency(const AffinityGraph& g) {
  const std::size_t n = g.n;
  std::vector<std::vector<std::pair<std::size_t, double>>> w(n);
  auto add = [&](std::size_t i, std::size_t j, double v) {
    for (auto& [c, val] : w[i])
      if (c == j) {
        val += v;
        return;
      }
    w[i].push_back({j, v});
  };
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, v] : g.rows[i]) {
      if (v == 0.0) continue;
      add(i, j, v);
      add(j, i, v);
    }

  std::vector<double> dinv_sqrt(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (const auto& [j, v] : w[i]) deg += v;
    if (deg > 0.0) dinv_sqrt[i] = 1.0 / std::sqrt(deg);
  }

  SparseMatrix a;
  a.n = n;
  a.rowptr.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(w[i].begin(), w[i].end());
    for (const auto& [j, v] : w[i]) {
      a.colidx.push_back(j);
      a.vals.push_back(dinv_sqrt[i] * v * dinv_sqrt[j]);
    }
    a.rowptr.push_back(a.colidx.size());
  }
  return a;
}

struct DiffusionResult {
  Matrix c;                   // n x n_classes diffusion scores
  std::size_t iterations = 0;  // max over class columns
  double residual = 0.0;       // ||(I - alpha A) C - Y||_F / ||Y||_F
};

/// Solves (I - alpha A) C = Y column by column with conjugate gradient.
/// alpha < 1 makes the system positive definite (rho(A) <= 1).
inline DiffusionResult cg_solve(const SparseMatrix& a, double alpha, const Matrix& y,
                                double tol = 1e-6, std::size_t max_iter = 200) {
  if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("diffusion alpha must be in (0, 1)");
  const std::size_t n = a.n, c = y.cols();
  if (y.rows() != n) throw ShapeMismatchError("cg_solve: Y row count mismatch");

  DiffusionResult out;
  out.c = Matrix(n, c);
  std::vector<double> x(n), r(n), p(n), ap(n), b(n);

  for (std::size_t col = 0; col < c; ++col) {
    for (std::size_t i = 0; i < n; ++i) b[i] = y(i, col);
    double bnorm2 = 0.0;
    for (double v : b) bnorm2 += v * v;
    std::fill(x.begin(), x.end(), 0.0);
    if (bnorm2 == 0.0) continue;

    r = b;  // x = 0 so r = b - Mx = b
    p = r;
    double rs = bnorm2;
    const double stop2 = tol * tol * bnorm2;
    std::size_t it = 0;
    while (rs > stop2 && it < max_iter) {
      a.matvec(p, ap);
      for (std::size_t i = 0; i < n; ++i) ap[i] = p[i] - alpha * ap[i];  // (I - alpha A) p
      double pap = 0.0;
      for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
      const double step = rs / pap;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += step * p[i];
        r[i] -= step * ap[i];
      }
      double rs_new = 0.0;
      for (double v : r) rs_new += v * v;
      const double beta = rs_new / rs;
      rs = rs_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
      ++it;
    }
    if (rs > stop2)
      throw ConvergenceFailureError("cg_solve: column " + std::to_string(col) +
                                    " residual " + std::to_string(std::sqrt(rs / bnorm2)) +
                                    " after " + std::to_string(max_iter) + " iterations");
    out.iterations = std::max(out.iterations, it);
    for (std::size_t i = 0; i < n; ++i) out.c(i, col) = x[i];
  }

  // true residual on the assembled solution
  double num = 0.0, den = 0.0;
  std::vector<double> av(n);
  for (std::size_t col = 0; col < c; ++col) {
    for (std::size_t i = 0; i < n; ++i) x[i] = out.c(i, col);
    a.matvec(x, av);
    for (std::size_t i = 0; i < n; ++i) {
      const double res = x[i] - alpha * av[i] - y(i, col);
      num += res * res;
      den += y(i, col) * y(i, col);
    }
  }
  out.residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
  return out;
}

struct PseudoLabelAssignment {
  std::vector<std::size_t> row_ids;  // dataset row ids of the unlabeled rows
  std::vector<int> label;            // argmax class per row
  std::vector<double> score;         // winning diffusion score
  std::vector<bool> assigned;        // false for all-zero score rows
  std::uint64_t epoch = 0;

  std::size_t n_assigned() const {
    return static_cast<std::size_t>(std::count(assigned.begin(), assigned.end(), true));
  }
};

/// Per-row argmax over diffusion scores, ties to the lower class index;
/// rows with no signal (all scores zero) stay unassigned.
inline PseudoLabelAssignment assign_pseudolabels(const DiffusionResult& result,
                                                 const std::vector<std::size_t>& node_index,
                                                 const std::vector<std::size_t>& row_ids,
                                                 std::uint64_t epoch = 0) {
  if (node_index.size() != row_ids.size())
    throw ShapeMismatchError("assign_pseudolabels: index/id misaligned");
  PseudoLabelAssignment out;
  out.epoch = epoch;
  out.row_ids = row_ids;
  for (std::size_t r = 0; r < node_index.size(); ++r) {
    const std::size_t i = node_index[r];
    int best = 0;
    double best_score = result.c(i, 0);
    for (std::size_t j = 1; j < result.c.cols(); ++j)
      if (result.c(i, j) > best_score) {
        best_score = result.c(i, j);
        best = static_cast<int>(j);
      }
    out.label.push_back(best);
    out.score.push_back(best_score);
    out.assigned.push_back(best_score > 0.0);
  }
  return out;
}

/// Full propagation pass: graph over [labeled latents; unlabeled latents],
/// one-hot Y on the labeled block, diffusion solve, argmax assignment.
inline PseudoLabelAssignment propagate_labels(const Matrix& z_labeled,
                                              const std::vector<int>& labels,
                                              const Matrix& z_unlabeled,
                                              const std::vector<std::size_t>& unlabeled_row_ids,
                                              int n_classes, std::size_t k, double alpha,
                                              double tol = 1e-6, std::size_t max_iter = 200,
                                              GraphSimilarity sim =
                                                  GraphSimilarity::ClippedCosineCubed,
                                              std::uint64_t epoch = 0) {
  const std::size_t nl = z_labeled.rows(), nu = z_unlabeled.rows();
  Matrix z = Matrix::vcat(z_labeled, z_unlabeled);
  AffinityGraph g = knn_graph(z, k, sim);
  SparseMatrix a = normalize_adjacency(g);
  Matrix y(nl + nu, static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < nl; ++i) y(i, static_cast<std::size_t>(labels[i])) = 1.0;
  DiffusionResult res = cg_solve(a, alpha, y, tol, max_iter);
  std::vector<std::size_t> node_index(nu);
  for (std::size_t i = 0; i < nu; ++i) node_index[i] = nl + i;
  return assign_pseudolabels(res, node_index, unlabeled_row_ids, epoch);
}

}  // namespace cmix
