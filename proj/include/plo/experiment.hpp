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

#ifndef PLO_EXPERIMENT_HPP
#define PLO_EXPERIMENT_HPP

#include "plo/bench.hpp"
#include "plo/config.hpp"
#include "plo/region.hpp"
#include "plo/trainer.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace plo {

/**
 * Creates and returns base/name, or base/name_1, base/name_2, ... when the
 * name is taken. An existing run directory is never reused.
 */
std::filesystem::path make_run_dir(const std::filesystem::path &base,
                                   const std::string &name);

/// Evaluation grid of cfg.env with the configured point counts.
EvalGrid eval_grid(const ExperimentConfig &cfg);
/// max_feasible_region over eval_grid(cfg) with the configured horizon.
std::vector<bool> theoretical_mask(const ExperimentConfig &cfg);

struct TrainRun {
  std::filesystem::path dir;
  TrainRecord record;
  ParamVector theta;
  std::vector<std::filesystem::path> checkpoints;
};

/**
 * Trains one seed into `dir`: config.txt (written first), train.csv and
 * checkpoint_<iter>.plo files. On divergence train.csv holds the rows up to
 * the failure, the last good parameters are checkpointed and the
 * DivergedRollout propagates.
 */
TrainRun run_train(const ExperimentConfig &cfg, std::uint64_t seed,
                   const std::filesystem::path &dir, std::ostream *log = nullptr);

/// A checkpoint file, or the checkpoint_<iter>.plo files of a directory in
/// iteration order.
std::vector<std::filesystem::path> list_checkpoints(const std::filesystem::path &path);

struct CheckpointEval {
  std::uint64_t iteration = 0;
  double proportion = 0;
  double mean_reward = 0; // over feasible cells, NaN if none
  RegionReport report;
};

/**
 * Evaluates each checkpoint against the configured environment, writing
 * region_<iter>.csv per checkpoint and summary.csv (iter,proportion) into
 * `dir`. Throws CheckpointError when a checkpoint's policy does not match
 * the configuration.
 */
std::vector<CheckpointEval> run_eval(const ExperimentConfig &cfg,
                                     const std::vector<std::filesystem::path> &checkpoints,
                                     const std::filesystem::path &dir,
                                     const std::vector<bool> &mask,
                                     std::ostream *log = nullptr);

struct CompareRow {
  std::uint64_t iteration = 0;
  std::uint64_t seed = 0;
  ControllerKind controller = ControllerKind::Pid;
  double proportion = 0;
  double mean_reward = 0;
};

struct SeedDelta {
  std::uint64_t seed = 0;
  double pid_proportion = 0;
  double plo_proportion = 0;
  /// Mean reward of each final policy over cells feasible for both.
  double pid_shared_reward = 0;
  double plo_shared_reward = 0;
  int shared_cells = 0;

  double delta() const { return plo_proportion - pid_proportion; }
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::vector<SeedDelta> deltas;
  std::vector<std::string> failures; // one message per failed sub-run
};

/**
 * For every seed trains PID and PLO (controller gains from cfg) in
 * <dir>/<controller>_seed<N>/, evaluates every checkpoint and writes
 * compare.csv (iter,seed,controller,proportion,mean_reward) after each
 * sub-run plus delta.csv (final proportions, plo - pid) at the end.
 */
CompareResult run_compare(const ExperimentConfig &cfg, const std::filesystem::path &dir,
                          std::ostream *log = nullptr);

/**
 * Synthetic controller study on the theory suite's problems for dual ascent,
 * PID and PLO: traces/instance_<i>_<controller>.csv (k,lambda,error,gap) and
 * synthetic_summary.csv
 * (instance,dim,active,controller,lambda_star,steps_to_1e-3,final_gap).
 */
std::vector<SyntheticRun> run_synthetic(const ExperimentConfig &cfg, std::uint64_t seed,
                                        const std::filesystem::path &dir,
                                        std::ostream *log = nullptr);

/// Controllers of the synthetic study, in output order.
std::vector<ControllerConfig> synthetic_controllers(const ExperimentConfig &cfg);

} // namespace plo

#endif // PLO_EXPERIMENT_HPP
