#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmix/data.hpp"
#include "cmix/errors.hpp"
#include "cmix/matrix.hpp"
#include "cmix/rng.hpp"

namespace cmix {

enum class Mode { Train, Eval };

/// A weight tensor with its paired gradient accumulator and Adam moments.
struct ParamTensor {
  Matrix w, g, m, v;

  void init_shape(std::size_t r, std::size_t c) {
    w = Matrix(r, c);
    g = Matrix(r, c);
    m = Matrix(r, c);
    v = Matrix(r, c);
  }
};

struct DenseLayer {
  ParamTensor W;  // in x out
  ParamTensor b;  // 1 x out
};

struct ReluLayer {};

struct BatchNormLayer {
  ParamTensor gamma, beta;           // 1 x d
  Matrix running_mean, running_var;  // 1 x d
  double momentum = 0.1;
  double eps = 1e-5;
};

using Layer = std::variant<DenseLayer, BatchNormLayer, ReluLayer>;

struct LayerCache {
  Matrix input;
  Matrix xhat, invstd;  // batchnorm only
  Mode mode = Mode::Train;
};

/// Saved activations of one forward pass, consumed by exactly one backward.
struct ForwardCache {
  std::size_t l0 = 0, l1 = 0;
  std::vector<LayerCache> layers;
  bool consumed = false;
};

/// A stack of primitive layers with optional block boundaries. Blocks are
/// the mixable units of the encoder (dense-batchnorm-relu triples); for
/// plain MLP heads every primitive is its own block.
class Network {
 public:
  std::vector<Layer> layers;
  std::vector<std::size_t> block_start;  // block t begins at primitive block_start[t]
  std::int64_t adam_t = 0;

  std::size_t n_blocks() const { return block_start.size(); }

  std::size_t primitive_of_block(std::size_t t) const {
    if (t > n_blocks()) throw IndexOutOfRangeError("block index out of range");
    return t == n_blocks() ? layers.size() : block_start[t];
  }

  /// Composes primitive layers [l0, l1). forward(x, 0, layers.size()) is the
  /// full pass; splitting at any point composes exactly.
  Matrix forward(const Matrix& x, std::size_t l0, std::size_t l1, Mode mode,
                 ForwardCache* cache = nullptr) {
    if (l0 > l1 || l1 > layers.size()) throw IndexOutOfRangeError("bad layer range");
    if (cache) {
      cache->l0 = l0;
      cache->l1 = l1;
      cache->layers.assign(l1 - l0, {});
      cache->consumed = false;
    }
    Matrix h = x;
    for (std::size_t l = l0; l < l1; ++l) {
      LayerCache* lc = cache ? &cache->layers[l - l0] : nullptr;
      h = forward_layer(layers[l], h, mode, lc);
    }
    h.check_finite("network activation");
    return h;
  }

  /// Block-indexed partial pass: composes encoder blocks [t0, t1).
  Matrix forward_blocks(const Matrix& x, std::size_t t0, std::size_t t1, Mode mode,
                        ForwardCache* cache = nullptr) {
    return forward(x, primitive_of_block(t0), primitive_of_block(t1), mode, cache);
  }

  /// Accumulates parameter gradients for the layers recorded in `cache` and
  /// returns the gradient w.r.t. the pass input.
  Matrix backward(ForwardCache& cache, Matrix dy) {
    if (cache.consumed) throw TapeReuseError("backward called twice on the same forward tape");
    cache.consumed = true;
    for (std::size_t l = cache.l1; l-- > cache.l0;)
      dy = backward_layer(layers[l], cache.layers[l - cache.l0], std::move(dy));
    return dy;
  }

  void zero_grads() {
    for_each_param([](ParamTensor& p) { p.g.fill(0.0); });
  }

  /// Standard Adam with bias correction; clears gradient accumulators.
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    ++adam_t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
    for_each_param([&](ParamTensor& p) {
      for (std::size_t i = 0; i < p.w.size(); ++i) {
        const double g = p.g.data()[i];
        double& m = p.m.data()[i];
        double& v = p.v.data()[i];
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g * g;
        p.w.data()[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
      }
      p.g.fill(0.0);
      p.w.check_finite("adam update");
    });
  }

  void for_each_param(const std::function<void(ParamTensor&)>& fn) {
    for (auto& layer : layers)
      std::visit(
          [&](auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, DenseLayer>) {
              fn(l.W);
              fn(l.b);
            } else if constexpr (std::is_same_v<T, BatchNormLayer>) {
              fn(l.gamma);
              fn(l.beta);
            }
          },
          layer);
  }
  void for_each_param(const std::function<void(const ParamTensor&)>& fn) const {
    const_cast<Network*>(this)->for_each_param(
        [&](ParamTensor& p) { fn(static_cast<const ParamTensor&>(p)); });
  }

  nlohmann::json to_json() const;
  static Network from_json(const nlohmann::json& j);

 private:
  static Matrix forward_layer(Layer& layer, const Matrix& x, Mode mode, LayerCache* lc) {
    return std::visit(
        [&](auto& l) -> Matrix {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, DenseLayer>) {
            if (x.cols() != l.W.w.rows()) throw ShapeMismatchError("dense: input width mismatch");
            Matrix y = matmul(x, l.W.w);
            for (std::size_t i = 0; i < y.rows(); ++i)
              for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += l.b.w(0, j);
            if (lc) lc->input = x;
            return y;
          } else if constexpr (std::is_same_v<T, ReluLayer>) {
            Matrix y = x;
            for (std::size_t i = 0; i < y.size(); ++i)
              if (y.data()[i] < 0.0) y.data()[i] = 0.0;
            if (lc) lc->input = x;
            return y;
          } else {  // BatchNormLayer
            const std::size_t n = x.rows(), d = x.cols();
            if (d != l.gamma.w.cols()) throw ShapeMismatchError("batchnorm: width mismatch");
            Matrix mean(1, d), var(1, d);
            if (mode == Mode::Train && n > 0) {
              for (std::size_t j = 0; j < d; ++j) {
                double mu = 0.0;
                for (std::size_t i = 0; i < n; ++i) mu += x(i, j);
                mu /= static_cast<double>(n);
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                  const double dv = x(i, j) - mu;
                  s += dv * dv;
                }
                mean(0, j) = mu;
                var(0, j) = s / static_cast<double>(n);
              }
              // running stats use the unbiased variance
              const double unbias = n > 1 ? static_cast<double>(n) / static_cast<double>(n - 1) : 1.0;
              for (std::size_t j = 0; j < d; ++j) {
                l.running_mean(0, j) =
                    (1.0 - l.momentum) * l.running_mean(0, j) + l.momentum * mean(0, j);
                l.running_var(0, j) =
                    (1.0 - l.momentum) * l.running_var(0, j) + l.momentum * var(0, j) * unbias;
              }
            } else {
              mean = l.running_mean;
              var = l.running_var;
            }
            Matrix invstd(1, d), xhat(n, d), y(n, d);
            for (std::size_t j = 0; j < d; ++j) invstd(0, j) = 1.0 / std::sqrt(var(0, j) + l.eps);
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < d; ++j) {
                xhat(i, j) = (x(i, j) - mean(0, j)) * invstd(0, j);
                y(i, j) = l.gamma.w(0, j) * xhat(i, j) + l.beta.w(0, j);
              }
            if (lc) {
              lc->xhat = std::move(xhat);
              lc->invstd = std::move(invstd);
              lc->mode = mode;
            }
            return y;
          }
        },
        layer);
  }

  static Matrix backward_layer(Layer& layer, const LayerCache& lc, Matrix dy) {
    return std::visit(
        [&](auto& l) -> Matrix {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, DenseLayer>) {
            l.W.g += matmul_tn(lc.input, dy);
            for (std::size_t i = 0; i < dy.rows(); ++i)
              for (std::size_t j = 0; j < dy.cols(); ++j) l.b.g(0, j) += dy(i, j);
            return matmul_nt(dy, l.W.w);
          } else if constexpr (std::is_same_v<T, ReluLayer>) {
            Matrix dx = std::move(dy);
            for (std::size_t i = 0; i < dx.size(); ++i)
              if (lc.input.data()[i] <= 0.0) dx.data()[i] = 0.0;
            return dx;
          } else {  // BatchNormLayer
            const std::size_t n = dy.rows(), d = dy.cols();
            Matrix dx(n, d);
            if (lc.mode == Mode::Eval) {
              for (std::size_t j = 0; j < d; ++j) {
                const double k = l.gamma.w(0, j) * lc.invstd(0, j);
                double dg = 0.0, db = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                  dg += dy(i, j) * lc.xhat(i, j);
                  db += dy(i, j);
                  dx(i, j) = dy(i, j) * k;
                }
                l.gamma.g(0, j) += dg;
                l.beta.g(0, j) += db;
              }
              return dx;
            }
            const double nn = static_cast<double>(n);
            for (std::size_t j = 0; j < d; ++j) {
              double sum_dy = 0.0, sum_dy_xhat = 0.0;
              for (std::size_t i = 0; i < n; ++i) {
                sum_dy += dy(i, j);
                sum_dy_xhat += dy(i, j) * lc.xhat(i, j);
              }
              l.gamma.g(0, j) += sum_dy_xhat;
              l.beta.g(0, j) += sum_dy;
              const double k = l.gamma.w(0, j) * lc.invstd(0, j) / nn;
              for (std::size_t i = 0; i < n; ++i)
                dx(i, j) = k * (nn * dy(i, j) - sum_dy - lc.xhat(i, j) * sum_dy_xhat);
            }
            return dx;
          }
        },
        layer);
  }
};

// ---- builders ------------------------------------------------------------

inline DenseLayer make_dense(std::size_t in, std::size_t out, std::mt19937_64& eng) {
  DenseLayer l;
  l.W.init_shape(in, out);
  l.b.init_shape(1, out);
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> d(-bound, bound);
  for (std::size_t i = 0; i < l.W.w.size(); ++i) l.W.w.data()[i] = d(eng);
  return l;
}

inline BatchNormLayer make_batchnorm(std::size_t d) {
  BatchNormLayer l;
  l.gamma.init_shape(1, d);
  l.beta.init_shape(1, d);
  l.gamma.w.fill(1.0);
  l.running_mean = Matrix(1, d);
  l.running_var = Matrix(1, d, 1.0);
  return l;
}

/// Encoder of T dense-batchnorm-relu blocks; mixable boundaries are block
/// starts (h^0 = the embedded input, h^t = output of block t).
inline Network make_encoder(std::size_t d_in, std::size_t d_hidden, std::size_t t_blocks,
                            std::mt19937_64& eng) {
  Network net;
  std::size_t w = d_in;
  for (std::size_t t = 0; t < t_blocks; ++t) {
    net.block_start.push_back(net.layers.size());
    net.layers.push_back(make_dense(w, d_hidden, eng));
    net.layers.push_back(make_batchnorm(d_hidden));
    net.layers.push_back(ReluLayer{});
    w = d_hidden;
  }
  return net;
}

/// Projection head: `l_proj` dense layers (ReLU between, linear last).
inline Network make_projector(std::size_t d_in, std::size_t d_proj, std::size_t l_proj,
                              std::mt19937_64& eng) {
  Network net;
  std::size_t w = d_in;
  for (std::size_t l = 0; l < l_proj; ++l) {
    net.block_start.push_back(net.layers.size());
    net.layers.push_back(make_dense(w, d_proj, eng));
    if (l + 1 < l_proj) net.layers.push_back(ReluLayer{});
    w = d_proj;
  }
  return net;
}

/// Predictor MLP: (FC-BN-ReLU) x (depth-1), then a linear layer to class
/// logits.
inline Network make_predictor(std::size_t d_in, std::size_t hidden, std::size_t depth,
                              std::size_t n_classes, std::mt19937_64& eng) {
  Network net;
  std::size_t w = d_in;
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    net.block_start.push_back(net.layers.size());
    net.layers.push_back(make_dense(w, hidden, eng));
    net.layers.push_back(make_batchnorm(hidden));
    net.layers.push_back(ReluLayer{});
    w = hidden;
  }
  net.block_start.push_back(net.layers.size());
  net.layers.push_back(make_dense(w, n_classes, eng));
  return net;
}

// ---- embedding layer -----------------------------------------------------

/// Embedding width rule for a categorical column.
inline std::size_t embed_dim(std::size_t cardinality) {
  const double d = 1.6 * std::pow(static_cast<double>(cardinality), 0.56);
  return std::min<std::size_t>(600, static_cast<std::size_t>(std::llround(d)));
}

/// Lookup tables mapping category indices to dense vectors; output is the
/// concatenation [continuous | embedded categoricals].
struct EmbeddingLayer {
  std::size_t n_cont = 0;
  std::vector<std::size_t> cardinalities;
  std::vector<ParamTensor> tables;  // cardinality x embed_dim each

  static EmbeddingLayer make(std::size_t n_cont, const std::vector<std::size_t>& cards,
                             std::mt19937_64& eng) {
    EmbeddingLayer e;
    e.n_cont = n_cont;
    e.cardinalities = cards;
    std::normal_distribution<double> d(0.0, 0.01);
    for (std::size_t card : cards) {
      ParamTensor t;
      t.init_shape(card, embed_dim(card));
      for (std::size_t i = 0; i < t.w.size(); ++i) t.w.data()[i] = d(eng);
      e.tables.push_back(std::move(t));
    }
    return e;
  }

  std::size_t out_dim() const {
    std::size_t d = n_cont;
    for (const auto& t : tables) d += t.w.cols();
    return d;
  }

  Matrix forward(const IntMatrix& cat, const Matrix& cont) const {
    const std::size_t n = cont.rows();
    if (!cat.empty() && cat.size() != n) throw ShapeMismatchError("embed: row count mismatch");
    Matrix out(n, out_dim());
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t off = 0;
      for (std::size_t j = 0; j < n_cont; ++j) out(i, off++) = cont(i, j);
      for (std::size_t c = 0; c < tables.size(); ++c) {
        const std::size_t idx = cat[i][c];
        if (idx >= cardinalities[c]) throw IndexOutOfRangeError("category index out of range");
        const auto row = tables[c].w.row(idx);
        for (double v : row) out(i, off++) = v;
      }
    }
    return out;
  }

  /// Scatter-adds the gradient of the concatenated output into the tables.
  void backward(const IntMatrix& cat, const Matrix& dout) {
    for (std::size_t i = 0; i < dout.rows(); ++i) {
      std::size_t off = n_cont;
      for (std::size_t c = 0; c < tables.size(); ++c) {
        const std::size_t idx = cat[i][c];
        auto grow = tables[c].g.row(idx);
        for (std::size_t k = 0; k < grow.size(); ++k) grow[k] += dout(i, off + k);
        off += tables[c].w.cols();
      }
    }
  }

  void zero_grads() {
    for (auto& t : tables) t.g.fill(0.0);
  }

  std::int64_t adam_t = 0;
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    ++adam_t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
    for (auto& p : tables) {
      for (std::size_t i = 0; i < p.w.size(); ++i) {
        const double g = p.g.data()[i];
        double& m = p.m.data()[i];
        double& v = p.v.data()[i];
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g * g;
        p.w.data()[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
      }
      p.g.fill(0.0);
    }
  }

  nlohmann::json to_json() const;
  static EmbeddingLayer from_json(const nlohmann::json& j);
};

// ---- decoder -------------------------------------------------------------

/// Decoder mirroring the encoder widths in reverse, ending in a linear layer
/// whose output splits into continuous reconstructions and per-categorical
/// logit blocks.
struct Decoder {
  Network net;
  std::size_t n_cont = 0;
  std::vector<std::size_t> cat_cards;

  static Decoder make(std::size_t d_latent, std::size_t d_hidden, std::size_t t_blocks,
                      std::size_t n_cont, const std::vector<std::size_t>& cat_cards,
                      std::mt19937_64& eng) {
    Decoder d;
    d.n_cont = n_cont;
    d.cat_cards = cat_cards;
    std::size_t out = n_cont;
    for (std::size_t c : cat_cards) out += c;
    d.net = make_encoder(d_latent, d_hidden, t_blocks, eng);
    d.net.block_start.push_back(d.net.layers.size());
    d.net.layers.push_back(make_dense(d_hidden, out, eng));
    return d;
  }

  /// Raw head output: columns [0, n_cont) are continuous reconstructions,
  /// then one logit block per categorical column.
  Matrix forward(const Matrix& z, Mode mode, ForwardCache* cache = nullptr) {
    return net.forward(z, 0, net.layers.size(), mode, cache);
  }

  /// Softmax over each categorical logit block; rows sum to one.
  std::vector<Matrix> cat_probabilities(const Matrix& raw) const {
    std::vector<Matrix> out;
    std::size_t off = n_cont;
    for (std::size_t card : cat_cards) {
      Matrix p(raw.rows(), card);
      for (std::size_t i = 0; i < raw.rows(); ++i) {
        double mx = raw(i, off);
        for (std::size_t k = 1; k < card; ++k) mx = std::max(mx, raw(i, off + k));
        double s = 0.0;
        for (std::size_t k = 0; k < card; ++k) s += std::exp(raw(i, off + k) - mx);
        for (std::size_t k = 0; k < card; ++k) p(i, k) = std::exp(raw(i, off + k) - mx) / s;
      }
      out.push_back(std::move(p));
      off += card;
    }
    return out;
  }
};

// ---- serialization -------------------------------------------------------

namespace detail {

inline nlohmann::json mat_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}
inline Matrix mat_from(const nlohmann::json& j) {
  return Matrix::from_rows(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                           j.at("data").get<std::vector<double>>());
}
inline nlohmann::json param_json(const ParamTensor& p) {
  return {{"w", mat_json(p.w)}, {"m", mat_json(p.m)}, {"v", mat_json(p.v)}};
}
inline ParamTensor param_from(const nlohmann::json& j) {
  ParamTensor p;
  p.w = mat_from(j.at("w"));
  p.m = mat_from(j.at("m"));
  p.v = mat_from(j.at("v"));
  p.g = Matrix(p.w.rows(), p.w.cols());
  return p;
}

}  // namespace detail

inline nlohmann::json Network::to_json() const {
  nlohmann::json layers_j = nlohmann::json::array();
  for (const auto& layer : layers)
    std::visit(
        [&](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, DenseLayer>) {
            layers_j.push_back({{"kind", "dense"},
                                {"W", detail::param_json(l.W)},
                                {"b", detail::param_json(l.b)}});
          } else if constexpr (std::is_same_v<T, BatchNormLayer>) {
            layers_j.push_back({{"kind", "batchnorm"},
                                {"gamma", detail::param_json(l.gamma)},
                                {"beta", detail::param_json(l.beta)},
                                {"running_mean", detail::mat_json(l.running_mean)},
                                {"running_var", detail::mat_json(l.running_var)},
                                {"momentum", l.momentum},
                                {"eps", l.eps}});
          } else {
            layers_j.push_back({{"kind", "relu"}});
          }
        },
        layer);
  return {{"layers", layers_j}, {"block_start", block_start}, {"adam_t", adam_t}};
}

inline Network Network::from_json(const nlohmann::json& j) {
  Network net;
  net.block_start = j.at("block_start").get<std::vector<std::size_t>>();
  net.adam_t = j.at("adam_t").get<std::int64_t>();
  for (const auto& lj : j.at("layers")) {
    const std::string kind = lj.at("kind").get<std::string>();
    if (kind == "dense") {
      DenseLayer l;
      l.W = detail::param_from(lj.at("W"));
      l.b = detail::param_from(lj.at("b"));
      net.layers.push_back(std::move(l));
    } else if (kind == "batchnorm") {
      BatchNormLayer l;
      l.gamma = detail::param_from(lj.at("gamma"));
      l.beta = detail::param_from(lj.at("beta"));
      l.running_mean = detail::mat_from(lj.at("running_mean"));
      l.running_var = detail::mat_from(lj.at("running_var"));
      l.momentum = lj.at("momentum").get<double>();
      l.eps = lj.at("eps").get<double>();
      net.layers.push_back(std::move(l));
    } else if (kind == "relu") {
      net.layers.push_back(ReluLayer{});
    } else {
      throw ConfigError("unknown layer kind in checkpoint: " + kind);
    }
  }
  return net;
}

inline nlohmann::json EmbeddingLayer::to_json() const {
  nlohmann::json tj = nlohmann::json::array();
  for (const auto& t : tables) tj.push_back(detail::param_json(t));
  return {{"n_cont", n_cont},
          {"cardinalities", cardinalities},
          {"tables", tj},
          {"adam_t", adam_t}};
}

inline EmbeddingLayer EmbeddingLayer::from_json(const nlohmann::json& j) {
  EmbeddingLayer e;
  e.n_cont = j.at("n_cont").get<std::size_t>();
  e.cardinalities = j.at("cardinalities").get<std::vector<std::size_t>>();
  e.adam_t = j.at("adam_t").get<std::int64_t>();
  for (const auto& tj : j.at("tables")) e.tables.push_back(detail::param_from(tj));
  return e;
}

}  // namespace cmix
