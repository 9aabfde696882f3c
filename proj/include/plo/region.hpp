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

#ifndef PLO_REGION_HPP
#define PLO_REGION_HPP

#include "plo/common.hpp"
#include "plo/envs.hpp"
#include "plo/policy.hpp"

#include <filesystem>
#include <string_view>
#include <vector>

namespace plo {

/// Evenly spaced samples of one state coordinate, endpoints included.
struct GridAxis {
  int state_index = 0;
  double lo = 0.0;
  double hi = 1.0;
  int points = 2;

  double at(int i) const;
  double spacing() const { return (hi - lo) / double(points - 1); }
};

/**
 * Two-dimensional slice of initial states. Coordinates not swept keep their
 * value from base_state. Cell c corresponds to (i0, i1) = (c / n1, c % n1).
 */
struct EvalGrid {
  GridAxis first;
  GridAxis second;
  Vector base_state;

  /// Double integrator: x1 in [1, 5] x x2 in [-2, 2], 81 x 81.
  /// Cartpole: p in [-1, 1] x phi in [-0.2, 0.2], velocities 0, 41 x 41.
  static EvalGrid for_env(const EnvModel &env);

  Eigen::Index cell_count() const { return Eigen::Index(first.points) * second.points; }
  Vector state(Eigen::Index cell) const;
  void validate(const EnvModel &env) const;
};

enum class CellLabel { Feasible, InitialInfeasible, EndlessInfeasible };

std::string_view to_string(CellLabel label);

struct RegionReport {
  EvalGrid grid;
  std::vector<CellLabel> labels;
  Vector max_violation; // +inf for diverged rollouts
  Vector mean_reward;   // -inf for diverged rollouts

  Eigen::Index count(CellLabel label) const;
};

/**
 * Labels every grid cell under the closed-loop policy:
 * initial_infeasible if c(x0) > 0; otherwise the policy is simulated for
 * `steps` steps and the cell is endless_infeasible if the largest per-step
 * cost along x_0..x_steps exceeds `threshold`, feasible otherwise.
 * mean_reward is the average of r(x_t, u_t) over t < steps.
 */
RegionReport evaluate(const PolicySpec &spec, const ParamVector &theta,
                      const EnvModel &env, const EvalGrid &grid, int steps = 200,
                      double threshold = 0.1);

/**
 * Full-state grid for the controlled-invariance fixed point. Each node is
 * propagated for `substeps` Euler steps under every constant action in
 * `actions`; the successor is the nearest node to the end point.
 */
struct ReachabilityGrid {
  std::vector<GridAxis> axes; // one per state coordinate, in state order
  std::vector<double> actions;
  int substeps = 5;

  static ReachabilityGrid for_env(const EnvModel &env);
  void validate(const EnvModel &env) const;
};

/**
 * Grid approximation of the largest set of initial states from which some
 * saturated action sequence keeps the per-step cost <= threshold for `steps`
 * steps. Nodes whose macro-step successors all leave the set are removed
 * round by round until the set is stable (or the horizon is covered).
 * Returns a mask over grid cells; cells with c(x0) > 0 are always excluded.
 */
std::vector<bool> max_feasible_region(const EnvModel &env, const EvalGrid &grid,
                                      int steps, double threshold,
                                      const ReachabilityGrid &reach);
std::vector<bool> max_feasible_region(const EnvModel &env, const EvalGrid &grid,
                                      int steps = 200, double threshold = 0.1);

/**
 * Feasible cells divided by mask cells. Ratios above 1 can only come from
 * grid resolution; they are clipped to 1 with a warning on stderr.
 * Throws ConfigError on an empty mask or a size mismatch.
 */
double proportion(const RegionReport &report, const std::vector<bool> &mask);

/// Mean of mean_reward over cells feasible in both reports (NaN if none).
double shared_feasible_reward(const RegionReport &report, const RegionReport &other);
/// Mean of mean_reward over feasible cells (NaN if none).
double feasible_mean_reward(const RegionReport &report);

/// CSV header: x1,x2,label,max_violation,mean_reward (swept coordinates).
void write_region_csv(const std::filesystem::path &path, const RegionReport &report);

} // namespace plo

#endif // PLO_REGION_HPP
