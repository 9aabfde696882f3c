/*
 * Copyright 2026 The PLO Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "plo/cli.hpp"
#include "plo/experiment.hpp"
#include "plo/theory.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace plo {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::string checkpoint;
  std::optional<int> instances;
  bool synthetic = false;
};

std::string env_name(const ExperimentConfig &cfg) { return std::string(to_string(cfg.env.kind)); }

std::string run_name(const ExperimentConfig &cfg, const std::string &fallback,
                     std::optional<std::uint64_t> seed) {
  if (cfg.run_id.empty())
    return fallback;
  if (seed && cfg.seeds.size() > 1)
    return cfg.run_id + "_seed" + std::to_string(*seed);
  return cfg.run_id;
}

ExperimentConfig resolve_config(const Options &opt, const fs::path &fallback_config) {
  ExperimentConfig cfg;
  if (!opt.config.empty())
    cfg = load_config(opt.config);
  else if (!fallback_config.empty() && fs::is_regular_file(fallback_config)) {
    cfg = load_config(fallback_config);
    cfg.run_id.clear();
  }
  if (!opt.seeds.empty())
    cfg.seeds = opt.seeds;
  if (!opt.out.empty())
    cfg.output_dir = opt.out;
  if (opt.instances)
    cfg.verify_instances = *opt.instances;
  cfg.validate();
  return cfg;
}

int cmd_train(const ExperimentConfig &cfg, std::ostream &out) {
  for (const std::uint64_t seed : cfg.seeds) {
    const std::string fallback = "train_" + env_name(cfg) + "_" +
                                 std::string(to_string(cfg.train.controller.kind)) +
                                 "_seed" + std::to_string(seed);
    const fs::path dir = make_run_dir(cfg.output_dir, run_name(cfg, fallback, seed));
    out << "run directory: " << dir.string() << std::endl;
    const TrainRun run = run_train(cfg, seed, dir, &out);
    out << "trained " << run.record.size() << " iterations, " << run.checkpoints.size()
        << " checkpoints" << std::endl;
  }
  return kExitOk;
}

int cmd_eval(const ExperimentConfig &cfg, const fs::path &checkpoint, std::ostream &out) {
  const auto checkpoints = list_checkpoints(checkpoint);
  std::string stem = checkpoint.stem().string();
  if (fs::is_directory(checkpoint)) {
    const fs::path norm = fs::absolute(checkpoint).lexically_normal();
    stem = (norm.has_filename() ? norm : norm.parent_path()).filename().string();
  }
  const fs::path dir = make_run_dir(cfg.output_dir, run_name(cfg, "eval_" + stem, {}));
  save_config(dir / "config.txt", cfg);
  out << "run directory: " << dir.string() << std::endl;
  const auto evals = run_eval(cfg, checkpoints, dir, theoretical_mask(cfg), &out);
  out << "evaluated " << evals.size() << " checkpoints" << std::endl;
  return kExitOk;
}

int cmd_verify(const ExperimentConfig &cfg, std::ostream &out) {
  const SuiteReport report = run_theory_suite(cfg.seeds.front(), cfg.verify_instances);
  out << format_suite(report);
  return report.passed() ? kExitOk : kExitFailure;
}

int cmd_compare(const ExperimentConfig &cfg, bool synthetic, std::ostream &out,
                std::ostream &err) {
  if (synthetic) {
    for (const std::uint64_t seed : cfg.seeds) {
      const fs::path dir = make_run_dir(
          cfg.output_dir, run_name(cfg, "synthetic_seed" + std::to_string(seed), seed));
      out << "run directory: " << dir.string() << std::endl;
      run_synthetic(cfg, seed, dir, &out);
    }
    return kExitOk;
  }
  const fs::path dir = make_run_dir(cfg.output_dir, run_name(cfg, "compare_" + env_name(cfg), {}));
  out << "run directory: " << dir.string() << std::endl;
  const CompareResult result = run_compare(cfg, dir, &out);
  for (const auto &d : result.deltas)
    out << "seed " << d.seed << ": pid " << d.pid_proportion << ", plo " << d.plo_proportion
        << ", delta " << d.delta() << std::endl;
  for (const auto &f : result.failures)
    err << "error: " << f << std::endl;
  return result.failures.empty() ? kExitOk : kExitFailure;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Multiplier feedback control for constrained policy optimization", "plo"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t verify_seed = 0;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", opt.config, "Experiment config file (key = value)");
    sub->add_option("--seed", opt.seeds, "Seed(s); overrides the config's seed list");
    sub->add_option("--out", opt.out, "Output directory; overrides output.dir");
  };
  CLI::App *train = app.add_subcommand("train", "Train a policy and write checkpoints");
  add_common(train);
  CLI::App *eval = app.add_subcommand("eval", "Evaluate checkpoints on the state grid");
  add_common(eval);
  eval->add_option("--checkpoint", opt.checkpoint, "Checkpoint file or directory")->required();
  CLI::App *verify = app.add_subcommand("verify", "Run the quadratic-problem theory checks");
  verify->add_option("--seed", verify_seed, "Instance seed");
  verify->add_option("--instances", opt.instances, "Number of random instances");
  verify->add_option("--config", opt.config, "Experiment config file (key = value)");
  CLI::App *compare = app.add_subcommand("compare", "Train PID and PLO side by side");
  add_common(compare);
  compare->add_flag("--synthetic", opt.synthetic, "Run the synthetic controller study instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return kExitInvalidConfig;
  }
  if (verify->parsed() && verify->count("--seed"))
    opt.seeds = {verify_seed};

  ExperimentConfig cfg;
  try {
    fs::path fallback;
    if (eval->parsed() && opt.config.empty()) {
      const fs::path ckpt(opt.checkpoint);
      fallback = (fs::is_directory(ckpt) ? ckpt : ckpt.parent_path()) / "config.txt";
    }
    cfg = resolve_config(opt, fallback);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << std::endl;
    return kExitInvalidConfig;
  }

  try {
    if (train->parsed())
      return cmd_train(cfg, out);
    if (eval->parsed())
      return cmd_eval(cfg, opt.checkpoint, out);
    if (verify->parsed())
      return cmd_verify(cfg, out);
    return cmd_compare(cfg, opt.synthetic, out, err);
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << std::endl;
    return kExitInvalidConfig;
  } catch (const CheckpointError &e) {
    err << "error: " << e.what() << std::endl;
    return kExitCheckpoint;
  } catch (const DivergedRollout &e) {
    err << "error: " << e.what() << " (step " << e.step() << ")" << std::endl;
    return kExitFailure;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << std::endl;
    return kExitFailure;
  }
}

} // namespace plo
