// Batch front end for the contrastive-mixup pipeline: declare an experiment
// in a JSON config, run one arm, the ablation ladder, or a labeled-size
// sweep, and emit plot-ready tables.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmix/experiment.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string arm_override;
  std::int64_t seed_override = -1;
  std::string out_override;
  int threads_override = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "experiment config file (JSON)")->required();
  cmd->add_option("--arm", o.arm_override, "override the config's arm");
  cmd->add_option("--seed", o.seed_override, "single-seed mode: replace the seed list");
  cmd->add_option("--out", o.out_override, "override the output directory");
  cmd->add_option("--threads", o.threads_override, "thread count (recorded in the manifest)");
}

cmix::ExperimentConfig resolve(const CommonOpts& o) {
  cmix::ExperimentConfig cfg = cmix::ExperimentConfig::from_file(o.config_path);
  if (!o.arm_override.empty()) cfg.arm = cmix::arm_from_name(o.arm_override);
  if (o.seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(o.seed_override)};
  if (!o.out_override.empty()) cfg.output_dir = o.out_override;
  if (o.threads_override > 0) cfg.threads = o.threads_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrastive-mixup semi-supervised tabular learning"};
  app.require_subcommand(1);

  CommonOpts run_o, ablate_o, curve_o, inspect_o;
  std::vector<std::size_t> counts;

  CLI::App* run = app.add_subcommand("run", "run the selected arm across all seeds");
  add_common(run, run_o);
  CLI::App* ablate = app.add_subcommand("ablate", "run the ablation arm ladder");
  add_common(ablate, ablate_o);
  CLI::App* curve = app.add_subcommand("curve", "sweep the labeled-set size");
  add_common(curve, curve_o);
  curve->add_option("--counts", counts, "labeled-set sizes to sweep")->required();
  CLI::App* inspect = app.add_subcommand("inspect", "print the resolved config");
  add_common(inspect, inspect_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmix::cmd_run(resolve(run_o));
    if (ablate->parsed()) return cmix::cmd_ablate(resolve(ablate_o));
    if (curve->parsed()) return cmix::cmd_curve(resolve(curve_o), counts);
    if (inspect->parsed()) {
      std::cout << resolve(inspect_o).to_json().dump(2) << '\n';
      return 0;
    }
  } catch (const cmix::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
