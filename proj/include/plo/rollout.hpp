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

#ifndef PLO_ROLLOUT_HPP
#define PLO_ROLLOUT_HPP

#include "plo/common.hpp"
#include "plo/envs.hpp"
#include "plo/policy.hpp"

#include <cstdint>
#include <vector>

namespace plo {

/// Finite-horizon objective settings. initial_states is state_dim x B.
struct RolloutConfig {
  int horizon = 80;
  double discount = 1.0;
  Matrix initial_states;
  std::uint64_t seed = 0;

  void validate(const EnvModel &env) const;
};

/// Closed-loop trajectory. actions are raw policy outputs; the environment
/// saturates them, so states[i+1] = step(states[i], actions[i]).
struct Trajectory {
  Matrix states; // state_dim x (horizon + 1)
  Vector actions;
  Vector rewards;
  Vector costs;
};

struct Objectives {
  double J = 0.0;
  double Jc = 0.0;
};

/// Objective values and parameter gradients at one parameter point.
struct GradBundle {
  double J = 0.0;
  double Jc = 0.0;
  ParamVector grad_J;
  ParamVector grad_Jc;
};

/// Axis-aligned box for sampling initial states (lo == hi pins a coordinate).
struct SamplingBox {
  Vector lo;
  Vector hi;

  static SamplingBox for_env(const EnvModel &env);
};

/// B states drawn uniformly from `box`, fully determined by `seed`.
Matrix sample_initial_states(const SamplingBox &box, int batch,
                             std::uint64_t seed);

Trajectory rollout(const PolicySpec &spec, const ParamVector &theta,
                   const EnvModel &env, const Eigen::Ref<const Vector> &x0,
                   const RolloutConfig &cfg);

/// Batch means of the discounted finite-horizon reward and cost sums.
Objectives objectives(const PolicySpec &spec, const ParamVector &theta,
                      const EnvModel &env, const RolloutConfig &cfg);

/**
 * Exact gradients of both objectives by backpropagation through time.
 *
 * The batch is split into fixed chunks that may run on separate workers; the
 * chunk results are summed in chunk order, so the result is bit-identical for
 * any PLO_THREADS.
 */
GradBundle gradients(const PolicySpec &spec, const ParamVector &theta,
                     const EnvModel &env, const RolloutConfig &cfg);

struct FdReport {
  std::vector<Eigen::Index> coords;
  double max_rel_error_J = 0.0;
  double max_rel_error_Jc = 0.0;
  double max_rel_error() const {
    return max_rel_error_J > max_rel_error_Jc ? max_rel_error_J : max_rel_error_Jc;
  }
};

/**
 * Compares adjoint gradients with central differences on `n_coords` random
 * coordinates. Relative error is |a - f| / max(|a|, |f|, floor) with
 * floor = 1e-8 * max(1, |grad|_inf), so exactly-zero pairs score 0.
 */
FdReport fd_check(const PolicySpec &spec, const ParamVector &theta,
                  const EnvModel &env, const RolloutConfig &cfg, int n_coords,
                  double eps, std::uint64_t seed = 0);

} // namespace plo

#endif // PLO_ROLLOUT_HPP
