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

#include "plo/region.hpp"
#include "plo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

namespace plo {

double GridAxis::at(int i) const {
  if (i == points - 1)
    return hi;
  return lo + spacing() * double(i);
}

EvalGrid EvalGrid::for_env(const EnvModel &env) {
  EvalGrid g;
  if (env.kind == EnvKind::DoubleIntegrator) {
    g.first = {0, 1.0, 5.0, 81};
    g.second = {1, -2.0, 2.0, 81};
    g.base_state = Vector::Zero(2);
  } else {
    g.first = {0, -1.0, 1.0, 41};
    g.second = {2, -0.2, 0.2, 41};
    g.base_state = Vector::Zero(4);
  }
  return g;
}

Vector EvalGrid::state(Eigen::Index cell) const {
  Vector x = base_state;
  x(first.state_index) = first.at(static_cast<int>(cell / second.points));
  x(second.state_index) = second.at(static_cast<int>(cell % second.points));
  return x;
}

void EvalGrid::validate(const EnvModel &env) const {
  if (base_state.size() != env.state_dim())
    throw ConfigError("evaluation grid base state has wrong dimension");
  for (const GridAxis *a : {&first, &second}) {
    if (a->points < 2)
      throw ConfigError("evaluation grid needs >= 2 points per axis");
    if (a->state_index < 0 || a->state_index >= env.state_dim())
      throw ConfigError("evaluation grid axis index out of range");
    if (!(a->hi > a->lo))
      throw ConfigError("evaluation grid axis needs hi > lo");
  }
  if (first.state_index == second.state_index)
    throw ConfigError("evaluation grid axes must sweep different coordinates");
}

std::string_view to_string(CellLabel label) {
  switch (label) {
  case CellLabel::Feasible:
    return "feasible";
  case CellLabel::InitialInfeasible:
    return "initial_infeasible";
  case CellLabel::EndlessInfeasible:
    return "endless_infeasible";
  }
  return "unknown";
}

Eigen::Index RegionReport::count(CellLabel label) const {
  return std::count(labels.begin(), labels.end(), label);
}

RegionReport evaluate(const PolicySpec &spec, const ParamVector &theta,
                      const EnvModel &env, const EvalGrid &grid, int steps,
                      double threshold) {
  grid.validate(env);
  if (steps < 1)
    throw ConfigError("evaluation needs >= 1 step");
  if (spec.input_dim != env.state_dim())
    throw ConfigError("checkpoint input dimension does not match the environment");

  const Eigen::Index cells = grid.cell_count();
  RegionReport report;
  report.grid = grid;
  report.labels.resize(cells);
  report.max_violation.resize(cells);
  report.mean_reward.resize(cells);

  constexpr Eigen::Index kBlock = 512;
  const int blocks = static_cast<int>((cells + kBlock - 1) / kBlock);
  const int n = env.state_dim();
  parallel_for(blocks, [&](int blk) {
    const Eigen::Index start = blk * kBlock;
    const Eigen::Index len = std::min(kBlock, cells - start);
    Matrix x(n, len), next(n, len);
    for (Eigen::Index j = 0; j < len; ++j)
      x.col(j) = grid.state(start + j);
    RowVector c(len), r(len);
    cost_batch(env, x, c);
    const RowVector initial_cost = c;
    RowVector worst = c;
    RowVector reward_sum = RowVector::Zero(len);
    std::vector<bool> diverged(len, false);
    for (int t = 0; t < steps; ++t) {
      const RowVector u = forward_batch(spec, theta, x);
      reward_batch(env, x, r);
      reward_sum += r;
      step_batch(env, x, u, next);
      x.swap(next);
      cost_batch(env, x, c);
      for (Eigen::Index j = 0; j < len; ++j) {
        if (!std::isfinite(c(j)) || !x.col(j).allFinite())
          diverged[j] = true;
        else
          worst(j) = std::max(worst(j), c(j));
      }
    }
    for (Eigen::Index j = 0; j < len; ++j) {
      const Eigen::Index cell = start + j;
      if (diverged[j]) {
        report.max_violation(cell) = std::numeric_limits<double>::infinity();
        report.mean_reward(cell) = -std::numeric_limits<double>::infinity();
      } else {
        report.max_violation(cell) = worst(j);
        report.mean_reward(cell) = reward_sum(j) / double(steps);
      }
      if (initial_cost(j) > 0.0)
        report.labels[cell] = CellLabel::InitialInfeasible;
      else if (diverged[j] || worst(j) > threshold)
        report.labels[cell] = CellLabel::EndlessInfeasible;
      else
        report.labels[cell] = CellLabel::Feasible;
    }
  });
  return report;
}

ReachabilityGrid ReachabilityGrid::for_env(const EnvModel &env) {
  ReachabilityGrid g;
  const double u = env.u_max;
  g.actions = {-u, -0.5 * u, 0.0, 0.5 * u, u};
  if (env.kind == EnvKind::DoubleIntegrator) {
    g.axes = {{0, 0.9, 5.1, 169}, {1, -2.5, 2.5, 201}};
    g.substeps = 5;
  } else {
    g.axes = {{0, -1.1, 1.1, 23}, {1, -2.0, 2.0, 21}, {2, -0.6, 0.6, 25}, {3, -2.5, 2.5, 21}};
    g.substeps = 5;
  }
  return g;
}

void ReachabilityGrid::validate(const EnvModel &env) const {
  if (static_cast<int>(axes.size()) != env.state_dim())
    throw ConfigError("reachability grid needs one axis per state coordinate");
  for (std::size_t i = 0; i < axes.size(); ++i)
    if (axes[i].state_index != static_cast<int>(i) || axes[i].points < 2 ||
        !(axes[i].hi > axes[i].lo))
      throw ConfigError("reachability grid axes must be ordered and non-degenerate");
  if (actions.empty() || substeps < 1)
    throw ConfigError("reachability grid needs actions and substeps >= 1");
}

namespace {

// Row-major node indexing over the reachability axes.
struct NodeIndexer {
  std::vector<GridAxis> axes;
  std::vector<Eigen::Index> strides;
  Eigen::Index total = 1;

  explicit NodeIndexer(const std::vector<GridAxis> &a) : axes(a), strides(a.size()) {
    for (int d = static_cast<int>(a.size()) - 1; d >= 0; --d) {
      strides[d] = total;
      total *= a[d].points;
    }
  }

  Vector state(Eigen::Index node) const {
    Vector x(axes.size());
    for (std::size_t d = 0; d < axes.size(); ++d)
      x(d) = axes[d].at(static_cast<int>((node / strides[d]) % axes[d].points));
    return x;
  }

  /// Nearest node, or -1 when x lies outside the grid box.
  Eigen::Index nearest(const Eigen::Ref<const Vector> &x) const {
    Eigen::Index node = 0;
    for (std::size_t d = 0; d < axes.size(); ++d) {
      const GridAxis &a = axes[d];
      const double slack = 0.5 * a.spacing();
      if (!(x(d) >= a.lo - slack && x(d) <= a.hi + slack))
        return -1;
      const long i = std::lround((x(d) - a.lo) / a.spacing());
      node += std::clamp<long>(i, 0, a.points - 1) * strides[d];
    }
    return node;
  }
};

} // namespace

std::vector<bool> max_feasible_region(const EnvModel &env, const EvalGrid &grid,
                                      int steps, double threshold,
                                      const ReachabilityGrid &reach) {
  env.validate();
  grid.validate(env);
  reach.validate(env);
  if (steps < 1 || !(threshold >= 0.0))
    throw ConfigError("max_feasible_region needs steps >= 1 and threshold >= 0");

  const NodeIndexer index(reach.axes);
  const Eigen::Index nodes = index.total;
  const int n_actions = static_cast<int>(reach.actions.size());
  // successors[node * A + a] = node reached under action a, or -1 if unsafe.
  std::vector<Eigen::Index> successors(nodes * n_actions, -1);
  std::vector<char> alive(nodes, 0);

  const Eigen::Index kBlock = 4096;
  const int blocks = static_cast<int>((nodes + kBlock - 1) / kBlock);
  parallel_for(blocks, [&](int blk) {
    const Eigen::Index end = std::min(nodes, (blk + 1) * kBlock);
    for (Eigen::Index node = blk * kBlock; node < end; ++node) {
      const Vector x0 = index.state(node);
      if (cost(env, x0) > threshold)
        continue;
      alive[node] = 1;
      for (int a = 0; a < n_actions; ++a) {
        Vector x = x0;
        bool safe = true;
        for (int s = 0; s < reach.substeps && safe; ++s) {
          x = step(env, x, reach.actions[a]);
          safe = x.allFinite() && cost(env, x) <= threshold;
        }
        if (safe)
          successors[node * n_actions + a] = index.nearest(x);
      }
    }
  });

  const int rounds = (steps + reach.substeps - 1) / reach.substeps;
  std::vector<char> next(nodes);
  for (int round = 0; round < rounds; ++round) {
    bool changed = false;
    for (Eigen::Index node = 0; node < nodes; ++node) {
      char keep = 0;
      if (alive[node])
        for (int a = 0; a < n_actions && !keep; ++a) {
          const Eigen::Index s = successors[node * n_actions + a];
          keep = s >= 0 && alive[s];
        }
      next[node] = keep;
      changed = changed || keep != alive[node];
    }
    alive.swap(next);
    if (!changed)
      break;
  }

  std::vector<bool> mask(grid.cell_count(), false);
  for (Eigen::Index cell = 0; cell < grid.cell_count(); ++cell) {
    const Vector x = grid.state(cell);
    if (cost(env, x) > 0.0)
      continue;
    const Eigen::Index node = index.nearest(x);
    mask[cell] = node >= 0 && alive[node];
  }
  return mask;
}

std::vector<bool> max_feasible_region(const EnvModel &env, const EvalGrid &grid,
                                      int steps, double threshold) {
  return max_feasible_region(env, grid, steps, threshold, ReachabilityGrid::for_env(env));
}

double proportion(const RegionReport &report, const std::vector<bool> &mask) {
  if (mask.size() != report.labels.size())
    throw ConfigError("mask and report cover different grids");
  const auto region = std::count(mask.begin(), mask.end(), true);
  if (region == 0)
    throw ConfigError("theoretical maximum region is empty");
  const double ratio = double(report.count(CellLabel::Feasible)) / double(region);
  if (ratio > 1.0) {
    std::cerr << "warning: feasible proportion " << ratio
              << " exceeds 1 (grid resolution); clipping\n";
    return 1.0;
  }
  return ratio;
}

double shared_feasible_reward(const RegionReport &report, const RegionReport &other) {
  if (report.labels.size() != other.labels.size())
    throw ConfigError("reports cover different grids");
  double sum = 0.0;
  Eigen::Index count = 0;
  for (std::size_t i = 0; i < report.labels.size(); ++i)
    if (report.labels[i] == CellLabel::Feasible && other.labels[i] == CellLabel::Feasible) {
      sum += report.mean_reward(static_cast<Eigen::Index>(i));
      ++count;
    }
  return count ? sum / double(count) : std::numeric_limits<double>::quiet_NaN();
}

double feasible_mean_reward(const RegionReport &report) {
  return shared_feasible_reward(report, report);
}

void write_region_csv(const std::filesystem::path &path, const RegionReport &report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << "x1,x2,label,max_violation,mean_reward\n";
  for (Eigen::Index cell = 0; cell < report.grid.cell_count(); ++cell) {
    const Vector x = report.grid.state(cell);
    out << format_double(x(report.grid.first.state_index)) << ','
        << format_double(x(report.grid.second.state_index)) << ','
        << to_string(report.labels[cell]) << ','
        << format_double(report.max_violation(cell)) << ','
        << format_double(report.mean_reward(cell)) << '\n';
  }
  if (!out)
    throw IoError("failed writing " + path.string());
}

} // namespace plo
