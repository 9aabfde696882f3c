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

#ifndef PLO_TRAINER_HPP
#define PLO_TRAINER_HPP

#include "plo/common.hpp"
#include "plo/envs.hpp"
#include "plo/multiplier.hpp"
#include "plo/policy.hpp"
#include "plo/rollout.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace plo {

struct TrainConfig {
  int iterations = 4000;
  double learning_rate = 1e-3;
  int checkpoint_period = 200;
  std::uint64_t seed = 0;
  int horizon = 80;
  double discount = 1.0;
  int batch_size = 64;
  /// Initial-state distribution; SamplingBox::for_env when unset.
  std::optional<SamplingBox> box;
  ControllerConfig controller;
  /// Fill the ms column from the wall clock. Off by default so reruns
  /// produce byte-identical records.
  bool record_time = false;

  void validate() const;
};

struct TrainRow {
  int iter = 0;
  double J = 0.0;
  double Jc = 0.0;
  double lambda = 0.0;
  double grad_J_norm = 0.0;
  double grad_Jc_norm = 0.0;
  double ms = 0.0;
};

using TrainRecord = std::vector<TrainRow>;

/// Seed of the initial-state batch used at iteration k.
std::uint64_t batch_seed(std::uint64_t master, int iteration);

struct StepOutcome {
  ParamVector theta;
  TrainRow row;
};

/**
 * One multiplier-guided policy update:
 *   bundle = gradients(theta_k)
 *   lambda_k = controller(bundle)
 *   theta_{k+1} = theta_k + eta (grad_J - lambda_k grad_Jc)
 */
StepOutcome train_step(const PolicySpec &spec, const ParamVector &theta,
                       ControllerState &state, const EnvModel &env,
                       const TrainConfig &cfg, int iteration);

struct TrainResult {
  ParamVector theta;
  TrainRecord record;
  std::vector<std::filesystem::path> checkpoints;
};

/**
 * Runs cfg.iterations steps from theta0. When checkpoint_dir is non-empty a
 * checkpoint is written every checkpoint_period iterations and after the last
 * one, named checkpoint_<iter>.plo with iter zero-padded to 6 digits.
 *
 * On a diverged rollout the last good parameters are saved as
 * checkpoint_<iter>_last_good.plo and the DivergedRollout is rethrown.
 */
TrainResult train(const PolicySpec &spec, const ParamVector &theta0,
                  const EnvModel &env, const TrainConfig &cfg,
                  const std::filesystem::path &checkpoint_dir = {},
                  const std::function<void(const TrainRow &)> &on_row = {});

std::filesystem::path checkpoint_name(const std::filesystem::path &dir, int iteration);

/// CSV header: iter,J,Jc,lambda,grad_J_norm,grad_Jc_norm,ms
void write_train_csv(const std::filesystem::path &path, const TrainRecord &record);

} // namespace plo

#endif // PLO_TRAINER_HPP
