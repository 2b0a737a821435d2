#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmix/config.hpp"
#include "cmix/data.hpp"
#include "cmix/labelprop.hpp"
#include "cmix/losses.hpp"
#include "cmix/mixup.hpp"
#include "cmix/network.hpp"
#include "cmix/rng.hpp"

namespace cmix {

/// All trainable parts of one experiment. Which members are populated
/// depends on the arm (the supervised/logistic arms have no encoder).
struct Model {
  EmbeddingLayer embedding;
  Network encoder;
  Decoder decoder;
  Network projector;
  Network predictor;
  bool has_encoder = false;

  nlohmann::json to_json() const {
    return {{"embedding", embedding.to_json()},  {"encoder", encoder.to_json()},
            {"decoder", decoder.net.to_json()},  {"decoder_n_cont", decoder.n_cont},
            {"decoder_cat_cards", decoder.cat_cards}, {"projector", projector.to_json()},
            {"predictor", predictor.to_json()},  {"has_encoder", has_encoder}};
  }
  static Model from_json(const nlohmann::json& j) {
    Model m;
    m.embedding = EmbeddingLayer::from_json(j.at("embedding"));
    m.encoder = Network::from_json(j.at("encoder"));
    m.decoder.net = Network::from_json(j.at("decoder"));
    m.decoder.n_cont = j.at("decoder_n_cont").get<std::size_t>();
    m.decoder.cat_cards = j.at("decoder_cat_cards").get<std::vector<std::size_t>>();
    m.projector = Network::from_json(j.at("projector"));
    m.predictor = Network::from_json(j.at("predictor"));
    m.has_encoder = j.at("has_encoder").get<bool>();
    return m;
  }
};

/// Collects per-epoch metric records (JSON lines) for the manifest.
struct MetricsSink {
  std::vector<nlohmann::json> lines;
  void log(nlohmann::json j) { lines.push_back(std::move(j)); }
};

namespace detail {

inline std::vector<std::size_t> cat_cards(const TabularDataset& ds) {
  std::vector<std::size_t> out;
  for (const auto& c : ds.categorical_schema()) out.push_back(c.cardinality);
  return out;
}

inline IntMatrix gather_cat(const IntMatrix& cat, std::span<const std::size_t> idx) {
  IntMatrix out;
  if (cat.empty()) return out;
  for (std::size_t i : idx) out.push_back(cat[i]);
  return out;
}

template <typename T>
std::vector<T> gather_vec(const std::vector<T>& v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace detail

/// Frozen-weight latent codes: embed then encode in eval mode (batchnorm on
/// running statistics).
inline Matrix encode_eval(Model& model, const TabularDataset& ds) {
  Matrix xbar = model.embedding.forward(ds.categorical, ds.continuous);
  if (!model.has_encoder) return xbar;
  return model.encoder.forward_blocks(xbar, 0, model.encoder.n_blocks(), Mode::Eval);
}

struct PretrainResult {
  std::optional<PseudoLabelAssignment> pseudo;   // over the S_U subset
  std::vector<int> pseudo_of_unlabeled;          // per unlabeled-dataset row; -1 unassigned
  double final_pseudo_accuracy = -1.0;           // vs held-back labels, -1 when n/a
};

struct PretrainOptions {
  double contrastive_weight = 1.0;  // 0 for the AE arm
  bool use_pseudo_labels = true;    // false for Self-SL and AE
  bool random_mixing = false;       // true for the random-mix ablation
};

/// Phases 1-2: warm-start pretraining on labeled contrastive + full
/// reconstruction, then pseudo-label-augmented pretraining with propagation
/// refresh every `refresh_every` epochs.
inline PretrainResult pretrain(Model& model, const TabularDataset& labeled,
                               const TabularDataset& unlabeled, const ExperimentConfig& cfg,
                               std::uint64_t seed, MetricsSink* sink = nullptr) {
  const PretrainConfig& pc = cfg.pretrain;
  PretrainOptions opt;
  switch (cfg.arm) {
    case Arm::SelfSl: opt.use_pseudo_labels = false; break;
    case Arm::Ae:
      opt.contrastive_weight = 0.0;
      opt.use_pseudo_labels = false;
      break;
    case Arm::RandomMixAblation: opt.random_mixing = true; break;
    default: break;
  }
  if (pc.gamma == 0.0) opt.use_pseudo_labels = false;

  if (labeled.n_rows() == 0) throw EmptyClassError("pretrain: labeled set is empty");
  const int n_classes = labeled.n_classes();
  if (n_classes < 2 && opt.contrastive_weight > 0.0)
    throw DegenerateBatchError("pretrain needs at least 2 classes");

  const std::size_t nl = labeled.n_rows(), nu = unlabeled.n_rows();
  const std::size_t d_cont = labeled.n_continuous();
  const std::size_t n_cat = labeled.n_categorical();
  const std::size_t d = model.embedding.out_dim();
  const std::size_t n_raw_cols = d_cont + n_cat;
  const double w_cont = pc.recon_cont_weight >= 0.0
                            ? pc.recon_cont_weight
                            : static_cast<double>(d_cont) / static_cast<double>(n_raw_cols);
  const double w_cat = pc.recon_cat_weight >= 0.0
                           ? pc.recon_cat_weight
                           : static_cast<double>(n_cat) / static_cast<double>(n_raw_cols);
  const std::size_t t_blocks = model.encoder.n_blocks();

  // the unlabeled subset fed to propagation, drawn once per experiment
  std::vector<std::size_t> su(nu);
  std::iota(su.begin(), su.end(), std::size_t{0});
  if (cfg.labelprop.max_unlabeled > 0 && nu > cfg.labelprop.max_unlabeled) {
    auto eng = substream(seed, "labelprop.subsample");
    shuffle_inplace(su, eng);
    su.resize(cfg.labelprop.max_unlabeled);
    std::sort(su.begin(), su.end());
  }

  auto mix_eng = substream(seed, "mixup");
  auto layer_eng = substream(seed, "mixlayer");

  PretrainResult result;
  result.pseudo_of_unlabeled.assign(nu, -1);

  auto refresh = [&](std::size_t epoch) {
    Matrix z_l = encode_eval(model, labeled);
    TabularDataset su_ds = unlabeled.subset(su);
    Matrix z_u = encode_eval(model, su_ds);
    try {
      auto assignment =
          propagate_labels(z_l, labeled.labels, z_u, detail::gather_vec(unlabeled.row_ids, su),
                           n_classes, cfg.labelprop.k, cfg.labelprop.alpha, cfg.labelprop.tol,
                           cfg.labelprop.max_iter, cfg.labelprop.similarity, epoch);
      result.pseudo = assignment;
      std::fill(result.pseudo_of_unlabeled.begin(), result.pseudo_of_unlabeled.end(), -1);
      std::size_t correct = 0, total = 0;
      for (std::size_t i = 0; i < su.size(); ++i) {
        if (!assignment.assigned[i]) continue;
        result.pseudo_of_unlabeled[su[i]] = assignment.label[i];
        if (!unlabeled.hidden_labels.empty()) {
          ++total;
          if (assignment.label[i] == unlabeled.hidden_labels[su[i]]) ++correct;
        }
      }
      result.final_pseudo_accuracy =
          total ? static_cast<double>(correct) / static_cast<double>(total) : -1.0;
      if (sink)
        sink->log({{"event", "labelprop_refresh"},
                   {"epoch", epoch},
                   {"assigned", assignment.n_assigned()},
                   {"pseudo_accuracy", result.final_pseudo_accuracy}});
    } catch (const ConvergenceFailureError& e) {
      if (sink)
        sink->log({{"event", "labelprop_refresh_failed"}, {"epoch", epoch}, {"error", e.what()}});
    }
  };

  for (std::size_t epoch = 1; epoch <= pc.total_epochs; ++epoch) {
    auto batches = make_epoch_batches(nl, nu, pc.batch_labeled, pc.batch_unlabeled, seed, epoch);
    double sum_con = 0.0, sum_rec = 0.0;
    for (const auto& bp : batches) {
      const std::size_t bl = bp.labeled.size(), bu = bp.unlabeled.size();
      TabularDataset lb = labeled.subset(bp.labeled);
      TabularDataset ub = unlabeled.subset(bp.unlabeled);

      Matrix cont = Matrix::vcat(lb.continuous, ub.continuous);
      IntMatrix cat = lb.categorical;
      for (auto& r : ub.categorical) cat.push_back(r);
      Matrix xbar = model.embedding.forward(cat, cont);

      // contrastive participants: labeled rows, plus pseudo-labeled rows
      std::vector<std::size_t> part;
      std::vector<int> part_labels;
      std::vector<double> part_weight;
      for (std::size_t i = 0; i < bl; ++i) {
        part.push_back(i);
        part_labels.push_back(lb.labels[i]);
        part_weight.push_back(1.0);
      }
      if (opt.use_pseudo_labels && result.pseudo)
        for (std::size_t i = 0; i < bu; ++i) {
          const int y = result.pseudo_of_unlabeled[bp.unlabeled[i]];
          if (y < 0) continue;
          part.push_back(bl + i);
          part_labels.push_back(y);
          part_weight.push_back(pc.gamma);
        }

      const std::size_t mix_block =
          t_blocks > 1 ? std::uniform_int_distribution<std::size_t>(0, t_blocks - 1)(layer_eng)
                       : 0;

      ForwardCache cache_lower, cache_upper, cache_mix, cache_dec, cache_p1, cache_p2;
      Matrix h = model.encoder.forward_blocks(xbar, 0, mix_block, Mode::Train, &cache_lower);
      Matrix z = model.encoder.forward_blocks(h, mix_block, t_blocks, Mode::Train, &cache_upper);

      const bool contrastive =
          opt.contrastive_weight > 0.0 && part.size() >= 2 &&
          (opt.random_mixing ||
           *std::max_element(part_labels.begin(), part_labels.end()) !=
               *std::min_element(part_labels.begin(), part_labels.end()));

      MixupResult mix;
      Matrix z_mix, v1, v2;
      SupConResult con;
      if (contrastive) {
        Matrix h_part = h.gather(part);
        auto lambda = sample_lambda(pc.mixup_alpha, part.size(), mix_eng);
        mix = opt.random_mixing
                  ? random_mixup(h_part, std::move(lambda), mix_eng)
                  : within_class_mixup(h_part, part_labels, std::move(lambda), mix_eng);
        z_mix = model.encoder.forward_blocks(mix.mixed, mix_block, t_blocks, Mode::Train,
                                             &cache_mix);
        v1 = model.projector.forward(z.gather(part), 0, model.projector.layers.size(),
                                     Mode::Train, &cache_p1);
        v2 = model.projector.forward(z_mix, 0, model.projector.layers.size(), Mode::Train,
                                     &cache_p2);
        con = opt.random_mixing
                  ? random_mix_contrastive_loss(v1, v2, mix.partner, mix.lambda, pc.tau,
                                                pc.denominator, &part_weight)
                  : supcon_loss(v1, v2, part_labels, pc.tau, pc.denominator, &part_weight);
        sum_con += con.loss;
      }

      ReconResult rec;
      Matrix raw;
      if (pc.beta > 0.0) {
        raw = model.decoder.forward(z, Mode::Train, &cache_dec);
        IntMatrix cat_t = cat;
        rec = reconstruction_loss(raw, model.decoder, cont, cat_t, w_cont, w_cat);
        sum_rec += rec.loss;
      }

      // backward
      Matrix dz(z.rows(), z.cols());
      if (pc.beta > 0.0) {
        Matrix draw = rec.draw;
        draw *= pc.beta;
        dz += model.decoder.net.backward(cache_dec, std::move(draw));
      }
      Matrix dh(h.rows(), h.cols());
      if (contrastive) {
        Matrix dv1 = con.dview1;
        dv1 *= opt.contrastive_weight;
        Matrix dv2 = con.dview2;
        dv2 *= opt.contrastive_weight;
        Matrix dz_part = model.projector.backward(cache_p1, std::move(dv1));
        for (std::size_t q = 0; q < part.size(); ++q) {
          auto src = dz_part.row(q);
          auto dst = dz.row(part[q]);
          for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
        }
        Matrix dz_mix = model.projector.backward(cache_p2, std::move(dv2));
        Matrix dh_mix = model.encoder.backward(cache_mix, std::move(dz_mix));
        for (std::size_t q = 0; q < part.size(); ++q) {
          const double l = mix.lambda[q];
          auto srcm = dh_mix.row(q);
          auto self = dh.row(part[q]);
          auto other = dh.row(part[mix.partner[q]]);
          for (std::size_t j = 0; j < srcm.size(); ++j) {
            self[j] += l * srcm[j];
            other[j] += (1.0 - l) * srcm[j];
          }
        }
      }
      dh += model.encoder.backward(cache_upper, std::move(dz));
      Matrix dxbar = model.encoder.backward(cache_lower, std::move(dh));
      model.embedding.backward(cat, dxbar);

      model.embedding.adam_step(pc.learning_rate);
      model.encoder.adam_step(pc.learning_rate);
      if (pc.beta > 0.0) model.decoder.net.adam_step(pc.learning_rate);
      if (contrastive) model.projector.adam_step(pc.learning_rate);
    }

    const bool pl_arm = opt.use_pseudo_labels && nu > 0;
    if (pl_arm && (epoch == pc.warm_start_epochs ||
                   (epoch > pc.warm_start_epochs &&
                    (epoch - pc.warm_start_epochs) % pc.refresh_every == 0)))
      refresh(epoch);

    if (sink)
      sink->log({{"event", "pretrain_epoch"},
                 {"epoch", epoch},
                 {"contrastive_loss", sum_con / static_cast<double>(batches.size())},
                 {"reconstruction_loss", sum_rec / static_cast<double>(batches.size())}});
  }
  return result;
}

/// Phase 3: frozen-encoder predictor training (Fig-2 style). Labeled and
/// pseudo-labeled latents are mixed with random Mixup and trained with soft
/// cross-entropy; the two branches sum with weight `unsup_weight`.
inline void train_predictor(Model& model, const TabularDataset& labeled,
                            const TabularDataset& unlabeled,
                            const std::vector<int>& pseudo_of_unlabeled,
                            const ExperimentConfig& cfg, std::uint64_t seed,
                            MetricsSink* sink = nullptr) {
  const PredictorConfig& pc = cfg.predictor;
  const int n_classes = labeled.n_classes();

  Matrix z_l = encode_eval(model, labeled);
  std::vector<std::size_t> pseudo_rows;
  std::vector<int> pseudo_labels;
  if (pc.use_pseudo_labels)
    for (std::size_t i = 0; i < pseudo_of_unlabeled.size(); ++i)
      if (pseudo_of_unlabeled[i] >= 0) {
        pseudo_rows.push_back(i);
        pseudo_labels.push_back(pseudo_of_unlabeled[i]);
      }
  Matrix z_u;
  if (!pseudo_rows.empty()) z_u = encode_eval(model, unlabeled.subset(pseudo_rows));

  auto mix_eng = substream(seed, "predictor.mixup");

  auto branch_loss = [&](const Matrix& z, const std::vector<std::size_t>& idx,
                         const std::vector<int>& ys, ForwardCache& cache) -> CeResult {
    Matrix zb = z.gather(idx);
    std::vector<int> yb = detail::gather_vec(ys, idx);
    if (pc.use_mixup && zb.rows() >= 2) {
      auto lambda = sample_lambda(pc.mixup_alpha, zb.rows(), mix_eng);
      MixupResult mix = random_mixup(zb, std::move(lambda), mix_eng);
      Matrix targets(zb.rows(), static_cast<std::size_t>(n_classes));
      for (std::size_t i = 0; i < zb.rows(); ++i) {
        targets(i, static_cast<std::size_t>(yb[i])) += mix.lambda[i];
        targets(i, static_cast<std::size_t>(yb[mix.partner[i]])) += 1.0 - mix.lambda[i];
      }
      Matrix logits = model.predictor.forward(mix.mixed, 0, model.predictor.layers.size(),
                                              Mode::Train, &cache);
      return soft_cross_entropy(logits, targets);
    }
    Matrix logits =
        model.predictor.forward(zb, 0, model.predictor.layers.size(), Mode::Train, &cache);
    return cross_entropy(logits, yb);
  };

  for (std::size_t epoch = 1; epoch <= pc.epochs; ++epoch) {
    auto batches = make_epoch_batches(z_l.rows(), z_u.rows(), pc.batch, pc.batch,
                                      seed ^ detail::fnv1a("predictor.batches"), epoch);
    double sum_loss = 0.0;
    for (const auto& bp : batches) {
      ForwardCache cache_sup, cache_unsup;
      CeResult sup = branch_loss(z_l, bp.labeled, labeled.labels, cache_sup);
      double loss = sup.loss;
      model.predictor.backward(cache_sup, std::move(sup.dlogits));
      if (!bp.unlabeled.empty() && pc.unsup_weight > 0.0) {
        CeResult unsup = branch_loss(z_u, bp.unlabeled, pseudo_labels, cache_unsup);
        loss += pc.unsup_weight * unsup.loss;
        Matrix d = std::move(unsup.dlogits);
        d *= pc.unsup_weight;
        model.predictor.backward(cache_unsup, std::move(d));
      }
      sum_loss += loss;
      model.predictor.adam_step(pc.learning_rate);
    }
    if (sink)
      sink->log({{"event", "predictor_epoch"},
                 {"epoch", epoch},
                 {"loss", sum_loss / static_cast<double>(std::max<std::size_t>(batches.size(), 1))}});
  }
}

struct EvalMetrics {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  std::size_t n = 0;
};

/// Test accuracy under argmax prediction, ties to the lower class index.
inline EvalMetrics evaluate(Model& model, const TabularDataset& test) {
  if (test.n_rows() == 0) throw EmptyClassError("evaluate: test set is empty");
  Matrix z = encode_eval(model, test);
  Matrix logits = model.predictor.forward(z, 0, model.predictor.layers.size(), Mode::Eval);
  const int n_classes = static_cast<int>(logits.cols());
  std::vector<std::size_t> correct(static_cast<std::size_t>(n_classes), 0),
      count(static_cast<std::size_t>(n_classes), 0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < n_classes; ++j)
      if (logits(i, static_cast<std::size_t>(j)) > logits(i, static_cast<std::size_t>(best)))
        best = j;
    const int truth = test.labels[i];
    ++count[static_cast<std::size_t>(truth)];
    if (best == truth) {
      ++hits;
      ++correct[static_cast<std::size_t>(truth)];
    }
  }
  EvalMetrics m;
  m.n = logits.rows();
  m.accuracy = static_cast<double>(hits) / static_cast<double>(m.n);
  for (int c = 0; c < n_classes; ++c)
    m.per_class_accuracy.push_back(
        count[static_cast<std::size_t>(c)]
            ? static_cast<double>(correct[static_cast<std::size_t>(c)]) /
                  static_cast<double>(count[static_cast<std::size_t>(c)])
            : 0.0);
  return m;
}

/// Supervised heads trained on embedded features only (no encoder): the
/// logistic and MLP/supervised baselines.
inline void train_supervised_head(Model& model, const TabularDataset& labeled,
                                  const ExperimentConfig& cfg, std::uint64_t seed,
                                  MetricsSink* sink = nullptr) {
  const PredictorConfig& pc = cfg.predictor;
  for (std::size_t epoch = 1; epoch <= pc.epochs; ++epoch) {
    auto batches = make_epoch_batches(labeled.n_rows(), 0, pc.batch, pc.batch, seed, epoch);
    double sum = 0.0;
    for (const auto& bp : batches) {
      TabularDataset b = labeled.subset(bp.labeled);
      Matrix xbar = model.embedding.forward(b.categorical, b.continuous);
      ForwardCache cache;
      Matrix logits =
          model.predictor.forward(xbar, 0, model.predictor.layers.size(), Mode::Train, &cache);
      CeResult ce = cross_entropy(logits, b.labels);
      sum += ce.loss;
      Matrix dxbar = model.predictor.backward(cache, std::move(ce.dlogits));
      model.embedding.backward(b.categorical, dxbar);
      model.embedding.adam_step(pc.learning_rate);
      model.predictor.adam_step(pc.learning_rate);
    }
    if (sink)
      sink->log({{"event", "supervised_epoch"},
                 {"epoch", epoch},
                 {"loss", sum / static_cast<double>(batches.size())}});
  }
}

struct RunResult {
  EvalMetrics metrics;
  Model model;
  PretrainResult pretrain;
  double wall_seconds = 0.0;
};

/// Builds the model for the arm, runs its phases, evaluates on test.
inline RunResult run_arm(const ExperimentConfig& cfg, const Split& split, std::uint64_t seed,
                         MetricsSink* sink = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const TabularDataset& labeled = split.train_labeled;
  const int n_classes = labeled.n_classes();
  auto init_eng = substream(seed, "init");

  RunResult out;
  Model& model = out.model;
  model.embedding = EmbeddingLayer::make(labeled.n_continuous(), detail::cat_cards(labeled),
                                         init_eng);
  const std::size_t d = model.embedding.out_dim();

  if (cfg.arm == Arm::Logistic || cfg.arm == Arm::Supervised) {
    if (cfg.arm == Arm::Logistic)
      model.predictor = make_predictor(d, cfg.predictor.hidden, 1,
                                       static_cast<std::size_t>(n_classes), init_eng);
    else
      model.predictor = make_predictor(d, cfg.predictor.hidden, cfg.predictor.depth,
                                       static_cast<std::size_t>(n_classes), init_eng);
    train_supervised_head(model, labeled, cfg, seed, sink);
  } else {
    const std::size_t hidden = cfg.pretrain.hidden_dim ? cfg.pretrain.hidden_dim : d;
    const std::size_t d_proj = cfg.pretrain.projector_dim ? cfg.pretrain.projector_dim : d;
    model.encoder = make_encoder(d, hidden, cfg.pretrain.encoder_layers, init_eng);
    model.decoder = Decoder::make(hidden, hidden, cfg.pretrain.encoder_layers,
                                  labeled.n_continuous(), detail::cat_cards(labeled), init_eng);
    model.projector = make_projector(hidden, d_proj, cfg.pretrain.projector_layers, init_eng);
    model.has_encoder = true;

    out.pretrain = pretrain(model, labeled, split.train_unlabeled, cfg, seed, sink);

    ExperimentConfig pcfg = cfg;
    if (cfg.arm == Arm::SelfSl || cfg.arm == Arm::Ae) pcfg.predictor.use_pseudo_labels = false;
    if (cfg.arm == Arm::SelfSlPl) pcfg.predictor.use_mixup = false;
    model.predictor = make_predictor(hidden, cfg.predictor.hidden, cfg.predictor.depth,
                                     static_cast<std::size_t>(n_classes), init_eng);
    train_predictor(model, labeled, split.train_unlabeled, out.pretrain.pseudo_of_unlabeled,
                    pcfg, seed, sink);
  }

  out.metrics = evaluate(model, split.test);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (sink)
    sink->log({{"event", "evaluate"},
               {"arm", arm_name(cfg.arm)},
               {"seed", seed},
               {"test_accuracy", out.metrics.accuracy},
               {"n_test", out.metrics.n}});
  return out;
}

struct SeedReport {
  std::vector<double> per_seed;
  double mean = 0.0;
  double stddev = 0.0;  // sample std; 0 for a single seed
};

inline SeedReport summarize(const std::vector<double>& xs) {
  SeedReport r;
  r.per_seed = xs;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double s = 0.0;
    for (double x : xs) s += (x - r.mean) * (x - r.mean);
    r.stddev = std::sqrt(s / static_cast<double>(xs.size() - 1));
  }
  return r;
}

/// Runs the configured arm once per seed and reports mean and sample std of
/// test accuracy.
inline SeedReport run_seeds(const ExperimentConfig& cfg, const TabularDataset& full_train,
                            const std::optional<TabularDataset>& separate_test,
                            MetricsSink* sink = nullptr) {
  std::vector<double> accs;
  for (std::uint64_t seed : cfg.seeds) {
    SplitSpec spec{cfg.dataset.labeled_fraction,
                   separate_test ? 0.0 : cfg.dataset.test_fraction, seed};
    Split sp = split(full_train, spec);
    if (separate_test) sp.test = *separate_test;
    accs.push_back(run_arm(cfg, sp, seed, sink).metrics.accuracy);
  }
  return summarize(accs);
}

}  // namespace cmix
