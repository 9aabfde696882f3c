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

#ifndef PLO_CONFIG_HPP
#define PLO_CONFIG_HPP

#include "plo/envs.hpp"
#include "plo/multiplier.hpp"
#include "plo/policy.hpp"
#include "plo/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace plo {

struct EvalSettings {
  int steps = 200;
  double threshold = 0.1;
  /// Grid points along the two swept coordinates; 0 keeps the env default.
  int first_points = 0;
  int second_points = 0;
};

/**
 * Everything a run needs. Text form is one `key = value` per line with
 * dotted keys; `#` starts a comment. Keys not listed here are rejected.
 *
 *   seeds                          comma-separated list, default 0
 *   env.kind                       double_integrator | cartpole
 *   env.dt env.u_max               defaults depend on env.kind
 *   env.cart_mass env.pole_mass env.half_length env.gravity
 *   policy.hidden_width policy.hidden_layers policy.activation (tanh)
 *   train.iterations train.learning_rate train.checkpoint_period
 *   train.batch_size train.record_time
 *   rollout.horizon rollout.discount
 *   controller.kind                penalty | dual | pid | plo
 *   controller.kp controller.ki controller.kd controller.lambda_init
 *   controller.lambda_max controller.penalty_ratio controller.penalty_proportional
 *   plo.horizon plo.regularization plo.qp_tolerance plo.qp_max_iterations
 *   eval.steps eval.threshold eval.first_points eval.second_points
 *   verify.n_instances
 *   synthetic.instances synthetic.steps
 *   output.dir output.run_id
 *
 * Policy input/output sizes follow the environment. The PLO step size is
 * always train.learning_rate.
 */
struct ExperimentConfig {
  std::vector<std::uint64_t> seeds{0};
  EnvModel env;
  PolicySpec policy;
  TrainConfig train;
  EvalSettings eval;
  int verify_instances = 100;
  int synthetic_instances = 100;
  int synthetic_steps = 200;
  std::string output_dir = "runs";
  std::string run_id; // empty: derived from the command

  void validate() const;
  /// Policy spec with dimensions taken from env and init_seed = seed.
  PolicySpec policy_for(std::uint64_t seed) const;
  /// Train config with the master seed set.
  TrainConfig train_for(std::uint64_t seed) const;
};

/// Throws ConfigError naming the offending key or line.
ExperimentConfig parse_config(std::string_view text);
/// IoError if the file cannot be read, ConfigError if it is invalid.
ExperimentConfig load_config(const std::filesystem::path &path);
/// Every key, fixed order, floats with 17 significant digits.
std::string serialize_config(const ExperimentConfig &cfg);
void save_config(const std::filesystem::path &path, const ExperimentConfig &cfg);

} // namespace plo

#endif // PLO_CONFIG_HPP
