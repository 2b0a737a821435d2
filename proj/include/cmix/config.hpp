#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmix/data.hpp"
#include "cmix/errors.hpp"
#include "cmix/labelprop.hpp"
#include "cmix/losses.hpp"

namespace cmix {

inline constexpr const char* kConfigVersion = "1";

enum class Arm {
  Supervised,
  SelfSl,
  SelfSlPl,
  Full,
  Ae,
  Logistic,
  RandomMixAblation,
};

inline std::string arm_name(Arm a) {
  switch (a) {
    case Arm::Supervised: return "supervised";
    case Arm::SelfSl: return "self_sl";
    case Arm::SelfSlPl: return "self_sl_pl";
    case Arm::Full: return "full";
    case Arm::Ae: return "ae";
    case Arm::Logistic: return "logistic";
    case Arm::RandomMixAblation: return "random_mix_ablation";
  }
  throw ConfigError("bad arm");
}

inline Arm arm_from_name(const std::string& s) {
  for (Arm a : {Arm::Supervised, Arm::SelfSl, Arm::SelfSlPl, Arm::Full, Arm::Ae, Arm::Logistic,
                Arm::RandomMixAblation})
    if (arm_name(a) == s) return a;
  throw ConfigError("unknown arm '" + s + "'");
}

struct DatasetConfig {
  std::string path;
  std::string test_path;  // empty: carve test_fraction out of `path`
  std::string label_column;
  std::vector<ColumnSchema> schema;
  double labeled_fraction = 0.1;
  double test_fraction = 0.2;
};

struct PretrainConfig {
  std::size_t warm_start_epochs = 20;  // K
  std::size_t total_epochs = 100;
  std::size_t refresh_every = 10;  // f
  double beta = 0.25;              // reconstruction weight
  double gamma = 1.0;              // pseudo-labeled contrastive weight
  double mixup_alpha = 0.2;
  double tau = 0.5;
  std::size_t batch_labeled = 256;
  std::size_t batch_unlabeled = 256;
  double learning_rate = 1e-3;
  std::size_t encoder_layers = 1;   // T
  std::size_t hidden_dim = 0;       // 0: post-embedding width d
  std::size_t projector_layers = 1;
  std::size_t projector_dim = 0;    // 0: d
  SupConDenominator denominator = SupConDenominator::PaperWithPositive;
  double recon_cont_weight = -1.0;  // <0: |C|/d
  double recon_cat_weight = -1.0;   // <0: |D|/d

  void validate() const {
    if (warm_start_epochs > total_epochs) throw ConfigError("warm_start_epochs exceeds total_epochs");
    if (refresh_every < 1) throw ConfigError("refresh_every must be >= 1");
    if (beta < 0.0 || gamma < 0.0) throw ConfigError("loss weights must be >= 0");
    if (mixup_alpha < 0.0 || mixup_alpha > 0.5)
      throw ConfigError("pretext mixup_alpha must be in [0, 0.5]");
    if (tau <= 0.0) throw ConfigError("tau must be positive");
    if (encoder_layers < 1) throw ConfigError("encoder_layers must be >= 1");
  }
};

struct LabelPropConfig {
  std::size_t k = 3;
  double alpha = 0.999;
  double tol = 1e-6;
  std::size_t max_iter = 200;
  std::size_t max_unlabeled = 0;  // 0: all unlabeled rows
  GraphSimilarity similarity = GraphSimilarity::ClippedCosineCubed;
};

struct PredictorConfig {
  std::size_t hidden = 100;
  std::size_t depth = 2;
  double mixup_alpha = 1.0;
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  std::size_t batch = 256;
  bool use_pseudo_labels = true;
  bool use_mixup = true;
  double unsup_weight = 1.0;

  void validate() const {
    if (depth < 1) throw ConfigError("predictor depth must be >= 1");
    if (mixup_alpha < 0.0 || mixup_alpha > 1.0)
      throw ConfigError("predictor mixup_alpha must be in [0, 1]");
  }
};

struct ExperimentConfig {
  DatasetConfig dataset;
  PretrainConfig pretrain;
  LabelPropConfig labelprop;
  PredictorConfig predictor;
  Arm arm = Arm::Full;
  std::vector<std::uint64_t> seeds = {123, 127, 131, 137, 130};
  std::string output_dir = "out";
  int threads = 1;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                           const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("bad value for key '") + key + "'");
    }
  }
}

}  // namespace detail

inline nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json schema_j = nlohmann::json::array();
  for (const auto& c : dataset.schema) {
    nlohmann::json cj = {{"name", c.name},
                         {"kind", c.kind == ColumnKind::Categorical ? "categorical" : "continuous"}};
    if (c.kind == ColumnKind::Categorical) cj["cardinality"] = c.cardinality;
    schema_j.push_back(cj);
  }
  return {
      {"config_version", kConfigVersion},
      {"dataset",
       {{"path", dataset.path},
        {"test_path", dataset.test_path},
        {"label_column", dataset.label_column},
        {"schema", schema_j},
        {"labeled_fraction", dataset.labeled_fraction},
        {"test_fraction", dataset.test_fraction}}},
      {"pretrain",
       {{"warm_start_epochs", pretrain.warm_start_epochs},
        {"total_epochs", pretrain.total_epochs},
        {"refresh_every", pretrain.refresh_every},
        {"beta", pretrain.beta},
        {"gamma", pretrain.gamma},
        {"mixup_alpha", pretrain.mixup_alpha},
        {"tau", pretrain.tau},
        {"batch_labeled", pretrain.batch_labeled},
        {"batch_unlabeled", pretrain.batch_unlabeled},
        {"learning_rate", pretrain.learning_rate},
        {"encoder_layers", pretrain.encoder_layers},
        {"hidden_dim", pretrain.hidden_dim},
        {"projector_layers", pretrain.projector_layers},
        {"projector_dim", pretrain.projector_dim},
        {"denominator",
         pretrain.denominator == SupConDenominator::PaperWithPositive ? "paper" : "supcon"},
        {"recon_cont_weight", pretrain.recon_cont_weight},
        {"recon_cat_weight", pretrain.recon_cat_weight}}},
      {"labelprop",
       {{"k", labelprop.k},
        {"alpha", labelprop.alpha},
        {"tol", labelprop.tol},
        {"max_iter", labelprop.max_iter},
        {"max_unlabeled", labelprop.max_unlabeled},
        {"similarity",
         labelprop.similarity == GraphSimilarity::ClippedCosineCubed ? "clipped_cosine_cubed"
                                                                     : "dot"}}},
      {"predictor",
       {{"hidden", predictor.hidden},
        {"depth", predictor.depth},
        {"mixup_alpha", predictor.mixup_alpha},
        {"epochs", predictor.epochs},
        {"learning_rate", predictor.learning_rate},
        {"batch", predictor.batch},
        {"use_pseudo_labels", predictor.use_pseudo_labels},
        {"use_mixup", predictor.use_mixup},
        {"unsup_weight", predictor.unsup_weight}}},
      {"arm", arm_name(arm)},
      {"seeds", seeds},
      {"output_dir", output_dir},
      {"threads", threads},
  };
}

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"config_version", "dataset", "pretrain", "labelprop", "predictor",
                             "arm", "seeds", "output_dir", "threads"},
                         "config");
  ExperimentConfig cfg;
  if (j.contains("config_version") && j.at("config_version").get<std::string>() != kConfigVersion)
    throw ConfigError("unsupported config_version");

  if (!j.contains("dataset")) throw ConfigError("config: missing 'dataset' section");
  {
    const auto& d = j.at("dataset");
    detail::reject_unknown(
        d, {"path", "test_path", "label_column", "schema", "labeled_fraction", "test_fraction"},
        "dataset");
    detail::read(d, "path", cfg.dataset.path);
    detail::read(d, "test_path", cfg.dataset.test_path);
    detail::read(d, "label_column", cfg.dataset.label_column);
    detail::read(d, "labeled_fraction", cfg.dataset.labeled_fraction);
    detail::read(d, "test_fraction", cfg.dataset.test_fraction);
    if (d.contains("schema")) {
      for (const auto& cj : d.at("schema")) {
        detail::reject_unknown(cj, {"name", "kind", "cardinality"}, "dataset.schema entry");
        ColumnSchema c;
        detail::read(cj, "name", c.name);
        std::string kind = "continuous";
        detail::read(cj, "kind", kind);
        if (kind == "categorical") c.kind = ColumnKind::Categorical;
        else if (kind == "continuous") c.kind = ColumnKind::Continuous;
        else throw ConfigError("dataset.schema: unknown kind '" + kind + "'");
        detail::read(cj, "cardinality", c.cardinality);
        cfg.dataset.schema.push_back(std::move(c));
      }
      validate_schema(cfg.dataset.schema);
    }
    if (cfg.dataset.path.empty()) throw ConfigError("dataset.path is required");
    if (cfg.dataset.label_column.empty()) throw ConfigError("dataset.label_column is required");
  }

  if (j.contains("pretrain")) {
    const auto& p = j.at("pretrain");
    detail::reject_unknown(p, {"warm_start_epochs", "total_epochs", "refresh_every", "beta",
                               "gamma", "mixup_alpha", "tau", "batch_labeled", "batch_unlabeled",
                               "learning_rate", "encoder_layers", "hidden_dim",
                               "projector_layers", "projector_dim", "denominator",
                               "recon_cont_weight", "recon_cat_weight"},
                           "pretrain");
    detail::read(p, "warm_start_epochs", cfg.pretrain.warm_start_epochs);
    detail::read(p, "total_epochs", cfg.pretrain.total_epochs);
    detail::read(p, "refresh_every", cfg.pretrain.refresh_every);
    detail::read(p, "beta", cfg.pretrain.beta);
    detail::read(p, "gamma", cfg.pretrain.gamma);
    detail::read(p, "mixup_alpha", cfg.pretrain.mixup_alpha);
    detail::read(p, "tau", cfg.pretrain.tau);
    detail::read(p, "batch_labeled", cfg.pretrain.batch_labeled);
    detail::read(p, "batch_unlabeled", cfg.pretrain.batch_unlabeled);
    detail::read(p, "learning_rate", cfg.pretrain.learning_rate);
    detail::read(p, "encoder_layers", cfg.pretrain.encoder_layers);
    detail::read(p, "hidden_dim", cfg.pretrain.hidden_dim);
    detail::read(p, "projector_layers", cfg.pretrain.projector_layers);
    detail::read(p, "projector_dim", cfg.pretrain.projector_dim);
    if (p.contains("denominator")) {
      const auto s = p.at("denominator").get<std::string>();
      if (s == "paper") cfg.pretrain.denominator = SupConDenominator::PaperWithPositive;
      else if (s == "supcon") cfg.pretrain.denominator = SupConDenominator::SupCon;
      else throw ConfigError("pretrain.denominator must be 'paper' or 'supcon'");
    }
    detail::read(p, "recon_cont_weight", cfg.pretrain.recon_cont_weight);
    detail::read(p, "recon_cat_weight", cfg.pretrain.recon_cat_weight);
    cfg.pretrain.validate();
  }

  if (j.contains("labelprop")) {
    const auto& p = j.at("labelprop");
    detail::reject_unknown(p, {"k", "alpha", "tol", "max_iter", "max_unlabeled", "similarity"},
                           "labelprop");
    detail::read(p, "k", cfg.labelprop.k);
    detail::read(p, "alpha", cfg.labelprop.alpha);
    detail::read(p, "tol", cfg.labelprop.tol);
    detail::read(p, "max_iter", cfg.labelprop.max_iter);
    detail::read(p, "max_unlabeled", cfg.labelprop.max_unlabeled);
    if (p.contains("similarity")) {
      const auto s = p.at("similarity").get<std::string>();
      if (s == "clipped_cosine_cubed") cfg.labelprop.similarity = GraphSimilarity::ClippedCosineCubed;
      else if (s == "dot") cfg.labelprop.similarity = GraphSimilarity::Dot;
      else throw ConfigError("labelprop.similarity must be 'clipped_cosine_cubed' or 'dot'");
    }
  }

  if (j.contains("predictor")) {
    const auto& p = j.at("predictor");
    detail::reject_unknown(p, {"hidden", "depth", "mixup_alpha", "epochs", "learning_rate",
                               "batch", "use_pseudo_labels", "use_mixup", "unsup_weight"},
                           "predictor");
    detail::read(p, "hidden", cfg.predictor.hidden);
    detail::read(p, "depth", cfg.predictor.depth);
    detail::read(p, "mixup_alpha", cfg.predictor.mixup_alpha);
    detail::read(p, "epochs", cfg.predictor.epochs);
    detail::read(p, "learning_rate", cfg.predictor.learning_rate);
    detail::read(p, "batch", cfg.predictor.batch);
    detail::read(p, "use_pseudo_labels", cfg.predictor.use_pseudo_labels);
    detail::read(p, "use_mixup", cfg.predictor.use_mixup);
    detail::read(p, "unsup_weight", cfg.predictor.unsup_weight);
    cfg.predictor.validate();
  }

  if (j.contains("arm")) cfg.arm = arm_from_name(j.at("arm").get<std::string>());
  detail::read(j, "seeds", cfg.seeds);
  if (cfg.seeds.empty()) throw ConfigError("seeds list must not be empty");
  detail::read(j, "output_dir", cfg.output_dir);
  detail::read(j, "threads", cfg.threads);
  return cfg;
}

inline ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace cmix
