#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmix/config.hpp"
#include "cmix/csv.hpp"
#include "cmix/data.hpp"
#include "cmix/trainer.hpp"

namespace cmix {

struct LoadedData {
  TabularDataset train;                 // raw units (standardization is per split)
  std::optional<TabularDataset> test;   // present when dataset.test_path is set
};

inline LoadedData load_experiment_data(const ExperimentConfig& cfg) {
  LoadedData out;
  out.train = load_csv(cfg.dataset.path, cfg.dataset.schema, cfg.dataset.label_column);
  if (!cfg.dataset.test_path.empty())
    out.test = load_csv(cfg.dataset.test_path, cfg.dataset.schema, cfg.dataset.label_column,
                        &out.train.vocab);
  return out;
}

struct PreparedSplit {
  Split split;
  Standardizer standardizer;
};

/// Seed-deterministic partition plus standardization fitted on the training
/// partition only (labeled plus unlabeled pool).
inline PreparedSplit prepare_split(const LoadedData& data, const ExperimentConfig& cfg,
                                   std::uint64_t seed) {
  SplitSpec spec{cfg.dataset.labeled_fraction, data.test ? 0.0 : cfg.dataset.test_fraction, seed};
  PreparedSplit out;
  out.split = split(data.train, spec);
  if (data.test) out.split.test = *data.test;

  // fit on the union of labeled and unlabeled training rows
  TabularDataset pool = out.split.train_labeled;
  pool.continuous = Matrix::vcat(out.split.train_labeled.continuous,
                                 out.split.train_unlabeled.continuous);
  out.standardizer = Standardizer::fit(pool);
  out.split.train_labeled = out.standardizer.apply(out.split.train_labeled);
  out.split.train_unlabeled = out.standardizer.apply(out.split.train_unlabeled);
  out.split.test = out.standardizer.apply(out.split.test);
  return out;
}

/// Variant with an absolute labeled count; the test partition stays fixed
/// across counts (carved once from the root split seed).
inline PreparedSplit prepare_split_by_count(const LoadedData& data, const ExperimentConfig& cfg,
                                            std::size_t n_labeled, std::uint64_t seed) {
  TabularDataset train = data.train;
  TabularDataset test;
  if (data.test) {
    test = *data.test;
  } else {
    // fixed test partition, independent of the per-point seed
    SplitSpec base{1.0, cfg.dataset.test_fraction, cfg.seeds.front()};
    Split b = split(data.train, base);
    test = b.test;
    train = b.train_labeled;  // labeled_fraction 1.0: the whole train pool
  }
  PreparedSplit out;
  out.split = split_by_count(train, test, n_labeled, seed);
  TabularDataset pool = out.split.train_labeled;
  pool.continuous = Matrix::vcat(out.split.train_labeled.continuous,
                                 out.split.train_unlabeled.continuous);
  out.standardizer = Standardizer::fit(pool);
  out.split.train_labeled = out.standardizer.apply(out.split.train_labeled);
  out.split.train_unlabeled = out.standardizer.apply(out.split.train_unlabeled);
  out.split.test = out.standardizer.apply(out.split.test);
  return out;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_json_file(const std::filesystem::path& p, const nlohmann::json& j) {
  std::ofstream os(p);
  os << j.dump(2) << '\n';
}

}  // namespace detail

struct ArmReport {
  Arm arm = Arm::Full;
  SeedReport accuracy;
};

/// Runs one arm over all seeds with fresh per-seed splits. Optionally
/// writes checkpoints and pseudo-label dumps under `out_dir`.
inline ArmReport run_arm_over_seeds(const ExperimentConfig& cfg, const LoadedData& data,
                                    MetricsSink& sink,
                                    const std::optional<std::filesystem::path>& out_dir =
                                        std::nullopt) {
  std::vector<double> accs;
  for (std::uint64_t seed : cfg.seeds) {
    PreparedSplit ps = prepare_split(data, cfg, seed);
    RunResult r = run_arm(cfg, ps.split, seed, &sink);
    accs.push_back(r.metrics.accuracy);
    if (out_dir) {
      const std::string tag = arm_name(cfg.arm) + "_seed" + std::to_string(seed);
      detail::write_json_file(*out_dir / (tag + "_standardizer.json"),
                              ps.standardizer.to_json());
      detail::write_json_file(*out_dir / (tag + "_model.json"), r.model.to_json());
      if (r.pretrain.pseudo) {
        std::ofstream os(*out_dir / (tag + "_pseudo_labels.csv"));
        csv::write_row(os, {"row_id", "pseudo_label", "top_score"});
        const auto& a = *r.pretrain.pseudo;
        for (std::size_t i = 0; i < a.row_ids.size(); ++i) {
          if (!a.assigned[i]) continue;
          csv::write_row(os, {std::to_string(a.row_ids[i]), std::to_string(a.label[i]),
                              detail::fmt_double(a.score[i])});
        }
      }
    }
  }
  return {cfg.arm, summarize(accs)};
}

inline nlohmann::json base_manifest(const ExperimentConfig& cfg) {
  nlohmann::json m;
  m["config"] = cfg.to_json();
  m["config_version"] = kConfigVersion;
  m["threads"] = cfg.threads;
  m["dataset_fingerprint"] = file_fingerprint(cfg.dataset.path);
  if (!cfg.dataset.test_path.empty())
    m["test_fingerprint"] = file_fingerprint(cfg.dataset.test_path);
  return m;
}

inline void write_outputs(const ExperimentConfig& cfg, nlohmann::json manifest,
                          const MetricsSink& sink, const std::vector<ArmReport>& reports,
                          double wall_seconds, const std::string& report_name = "report.csv") {
  const std::filesystem::path out(cfg.output_dir);
  std::filesystem::create_directories(out);

  manifest["wall_seconds"] = wall_seconds;
  detail::write_json_file(out / "manifest.json", manifest);

  std::ofstream mj(out / "metrics.jsonl");
  for (const auto& line : sink.lines) mj << line.dump() << '\n';

  std::ofstream rep(out / report_name);
  csv::write_row(rep, {"arm", "mean", "std"});
  for (const auto& r : reports)
    csv::write_row(rep, {arm_name(r.arm), detail::fmt_double(r.accuracy.mean),
                         detail::fmt_double(r.accuracy.stddev)});
}

/// `run`: the selected arm across all seeds.
inline int cmd_run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  LoadedData data = load_experiment_data(cfg);
  const std::filesystem::path out(cfg.output_dir);
  std::filesystem::create_directories(out);
  detail::write_json_file(out / "vocabulary.json", data.train.vocab.to_json());

  MetricsSink sink;
  ArmReport rep = run_arm_over_seeds(cfg, data, sink, out);
  nlohmann::json manifest = base_manifest(cfg);
  manifest["results"] = {{arm_name(rep.arm),
                          {{"mean", rep.accuracy.mean},
                           {"std", rep.accuracy.stddev},
                           {"per_seed", rep.accuracy.per_seed}}}};
  write_outputs(cfg, std::move(manifest),
                sink, {rep},
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

inline const std::vector<Arm> kAblationArms = {Arm::Supervised, Arm::SelfSl, Arm::SelfSlPl,
                                               Arm::Full, Arm::RandomMixAblation};

/// `ablate`: the Table-1 arm ladder plus the random-mixing arm on identical
/// splits and seeds, one combined CSV.
inline int cmd_ablate(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  LoadedData data = load_experiment_data(cfg);
  MetricsSink sink;
  std::vector<ArmReport> reports;
  nlohmann::json results;
  for (Arm arm : kAblationArms) {
    ExperimentConfig acfg = cfg;
    acfg.arm = arm;
    ArmReport rep = run_arm_over_seeds(acfg, data, sink);
    results[arm_name(arm)] = {{"mean", rep.accuracy.mean},
                              {"std", rep.accuracy.stddev},
                              {"per_seed", rep.accuracy.per_seed}};
    reports.push_back(std::move(rep));
  }
  nlohmann::json manifest = base_manifest(cfg);
  manifest["results"] = results;
  write_outputs(cfg, std::move(manifest), sink, reports,
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

/// `curve`: labeled-set-size sweep with the test set fixed across points.
inline int cmd_curve(const ExperimentConfig& cfg, const std::vector<std::size_t>& counts) {
  const auto t0 = std::chrono::steady_clock::now();
  LoadedData data = load_experiment_data(cfg);
  const std::filesystem::path out(cfg.output_dir);
  std::filesystem::create_directories(out);

  MetricsSink sink;
  std::ofstream rep(out / "curve.csv");
  csv::write_row(rep, {"n_labeled", "arm", "mean", "std"});
  nlohmann::json results = nlohmann::json::array();
  for (std::size_t n : counts) {
    std::vector<double> accs;
    for (std::uint64_t seed : cfg.seeds) {
      PreparedSplit ps = prepare_split_by_count(data, cfg, n, seed);
      accs.push_back(run_arm(cfg, ps.split, seed, &sink).metrics.accuracy);
    }
    SeedReport r = summarize(accs);
    csv::write_row(rep, {std::to_string(n), arm_name(cfg.arm), detail::fmt_double(r.mean),
                         detail::fmt_double(r.stddev)});
    results.push_back({{"n_labeled", n}, {"mean", r.mean}, {"std", r.stddev}});
  }
  rep.close();

  nlohmann::json manifest = base_manifest(cfg);
  manifest["curve"] = results;
  manifest["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::write_json_file(out / "manifest.json", manifest);
  std::ofstream mj(out / "metrics.jsonl");
  for (const auto& line : sink.lines) mj << line.dump() << '\n';
  return 0;
}

}  // namespace cmix
