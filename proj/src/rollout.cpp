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

#include "plo/rollout.hpp"
#include "plo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace plo {

namespace {

constexpr int kChunk = 32;

// Forward pass of one chunk with everything the adjoint sweep needs.
struct ChunkTape {
  std::vector<Matrix> states;     // horizon + 1 entries, n x b
  std::vector<RowVector> actions; // raw policy outputs, 1 x b
  std::vector<PolicyTape> policy;
  double reward_sum = 0.0;
  double cost_sum = 0.0;
};

void rollout_chunk(const PolicySpec &spec, const ParamVector &theta,
                   const EnvModel &env, const RolloutConfig &cfg,
                   const Eigen::Ref<const Matrix> &x0, bool record,
                   ChunkTape &tape) {
  const int n = env.state_dim();
  const Eigen::Index b = x0.cols();
  Matrix x = x0;
  Matrix next(n, b);
  RowVector r(b), c(b);
  double weight = 1.0;
  if (record) {
    tape.states.assign(1, x);
    tape.actions.clear();
    tape.policy.resize(cfg.horizon);
  }
  tape.reward_sum = 0.0;
  tape.cost_sum = 0.0;
  for (int t = 0; t < cfg.horizon; ++t) {
    RowVector u = forward_batch(spec, theta, x, record ? &tape.policy[t] : nullptr);
    reward_batch(env, x, r);
    cost_batch(env, x, c);
    tape.reward_sum += weight * r.sum();
    tape.cost_sum += weight * c.sum();
    step_batch(env, x, u, next);
    if (!next.allFinite())
      throw DivergedRollout(t + 1, "rollout diverged: non-finite state at step " +
                                       std::to_string(t + 1));
    x.swap(next);
    if (record) {
      tape.actions.push_back(std::move(u));
      tape.states.push_back(x);
    }
    weight *= cfg.discount;
  }
}

enum class Channel { Reward, Cost };

// Adds d/dtheta of sum_t gamma^t signal_t over the chunk into `grad`.
void adjoint_sweep(const PolicySpec &spec, const ParamVector &theta,
                   const EnvModel &env, const RolloutConfig &cfg,
                   const ChunkTape &tape, Channel channel,
                   Eigen::Ref<ParamVector> grad) {
  const int n = env.state_dim();
  const Eigen::Index b = tape.states.front().cols();
  Matrix adj = Matrix::Zero(n, b); // d objective / d x_{t+1}
  Matrix dX(n, b), signal_grad(n, b), d_input;
  RowVector dU(b);
  std::vector<double> weights(cfg.horizon);
  double w = 1.0;
  for (int t = 0; t < cfg.horizon; ++t, w *= cfg.discount)
    weights[t] = w;

  for (int t = cfg.horizon - 1; t >= 0; --t) {
    const Matrix &x = tape.states[t];
    step_vjp_batch(env, x, tape.actions[t], adj, dX, dU);
    if (channel == Channel::Reward)
      reward_grad_batch(env, x, signal_grad);
    else
      cost_grad_batch(env, x, signal_grad);
    dX += weights[t] * signal_grad;
    // Neither reward depends on u, so dU carries only the dynamics path.
    if (!dU.isZero(0.0)) {
      backward_batch(spec, theta, tape.policy[t], dU, grad, &d_input);
      dX += d_input;
    }
    adj.swap(dX);
  }
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> chunks(Eigen::Index batch) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  for (Eigen::Index s = 0; s < batch; s += kChunk)
    out.emplace_back(s, std::min<Eigen::Index>(kChunk, batch - s));
  return out;
}

} // namespace

void RolloutConfig::validate(const EnvModel &env) const {
  if (horizon < 1)
    throw ConfigError("rollout.horizon must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0))
    throw ConfigError("rollout.discount must be in (0, 1]");
  if (initial_states.cols() < 1)
    throw ConfigError("rollout batch of initial states is empty");
  if (initial_states.rows() != env.state_dim())
    throw ConfigError("initial states have wrong dimension");
  if (!initial_states.allFinite())
    throw DivergedRollout(0, "non-finite initial state");
}

SamplingBox SamplingBox::for_env(const EnvModel &env) {
  SamplingBox box;
  if (env.kind == EnvKind::DoubleIntegrator) {
    box.lo = Vector{{1.0, -2.0}};
    box.hi = Vector{{5.0, 2.0}};
  } else {
    box.lo = Vector{{-1.0, 0.0, -0.2, 0.0}};
    box.hi = Vector{{1.0, 0.0, 0.2, 0.0}};
  }
  return box;
}

Matrix sample_initial_states(const SamplingBox &box, int batch,
                             std::uint64_t seed) {
  if (batch < 1)
    throw ConfigError("batch size must be >= 1");
  if (box.lo.size() != box.hi.size())
    throw ConfigError("sampling box bounds differ in size");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix X(box.lo.size(), batch);
  for (int b = 0; b < batch; ++b)
    for (Eigen::Index i = 0; i < box.lo.size(); ++i)
      X(i, b) = box.lo(i) + (box.hi(i) - box.lo(i)) * unit(rng);
  return X;
}

Trajectory rollout(const PolicySpec &spec, const ParamVector &theta,
                   const EnvModel &env, const Eigen::Ref<const Vector> &x0,
                   const RolloutConfig &cfg) {
  if (cfg.horizon < 1)
    throw ConfigError("rollout.horizon must be >= 1");
  if (x0.size() != env.state_dim())
    throw ConfigError("initial state has wrong dimension");
  if (!x0.allFinite())
    throw DivergedRollout(0, "non-finite initial state");
  const int n = env.state_dim();
  Trajectory traj;
  traj.states.resize(n, cfg.horizon + 1);
  traj.actions.resize(cfg.horizon);
  traj.rewards.resize(cfg.horizon);
  traj.costs.resize(cfg.horizon);
  traj.states.col(0) = x0;
  Matrix next(n, 1);
  RowVector sig(1);
  for (int t = 0; t < cfg.horizon; ++t) {
    const auto x = traj.states.col(t);
    const RowVector u = forward_batch(spec, theta, x);
    traj.actions(t) = u(0);
    reward_batch(env, x, sig);
    traj.rewards(t) = sig(0);
    cost_batch(env, x, sig);
    traj.costs(t) = sig(0);
    step_batch(env, x, u, next);
    if (!next.allFinite())
      throw DivergedRollout(t + 1, "rollout diverged: non-finite state at step " +
                                       std::to_string(t + 1));
    traj.states.col(t + 1) = next.col(0);
  }
  return traj;
}

Objectives objectives(const PolicySpec &spec, const ParamVector &theta,
                      const EnvModel &env, const RolloutConfig &cfg) {
  cfg.validate(env);
  const auto parts = chunks(cfg.initial_states.cols());
  std::vector<ChunkTape> tapes(parts.size());
  parallel_for(static_cast<int>(parts.size()), [&](int i) {
    const auto [start, len] = parts[i];
    rollout_chunk(spec, theta, env, cfg,
                  cfg.initial_states.middleCols(start, len), false, tapes[i]);
  });
  Objectives obj;
  for (const auto &t : tapes) {
    obj.J += t.reward_sum;
    obj.Jc += t.cost_sum;
  }
  const double batch = double(cfg.initial_states.cols());
  obj.J /= batch;
  obj.Jc /= batch;
  return obj;
}

GradBundle gradients(const PolicySpec &spec, const ParamVector &theta,
                     const EnvModel &env, const RolloutConfig &cfg) {
  cfg.validate(env);
  const auto parts = chunks(cfg.initial_states.cols());
  const Eigen::Index p = spec.param_count();
  std::vector<ChunkTape> tapes(parts.size());
  std::vector<ParamVector> grad_J(parts.size()), grad_Jc(parts.size());
  parallel_for(static_cast<int>(parts.size()), [&](int i) {
    const auto [start, len] = parts[i];
    ChunkTape &tape = tapes[i];
    rollout_chunk(spec, theta, env, cfg,
                  cfg.initial_states.middleCols(start, len), true, tape);
    grad_J[i] = ParamVector::Zero(p);
    grad_Jc[i] = ParamVector::Zero(p);
    adjoint_sweep(spec, theta, env, cfg, tape, Channel::Reward, grad_J[i]);
    adjoint_sweep(spec, theta, env, cfg, tape, Channel::Cost, grad_Jc[i]);
    // Release the tape early; only the sums are needed from here on.
    tape.states.clear();
    tape.actions.clear();
    tape.policy.clear();
  });
  GradBundle out;
  out.grad_J = ParamVector::Zero(p);
  out.grad_Jc = ParamVector::Zero(p);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out.J += tapes[i].reward_sum;
    out.Jc += tapes[i].cost_sum;
    out.grad_J += grad_J[i];
    out.grad_Jc += grad_Jc[i];
  }
  const double inv_batch = 1.0 / double(cfg.initial_states.cols());
  out.J *= inv_batch;
  out.Jc *= inv_batch;
  out.grad_J *= inv_batch;
  out.grad_Jc *= inv_batch;
  return out;
}

FdReport fd_check(const PolicySpec &spec, const ParamVector &theta,
                  const EnvModel &env, const RolloutConfig &cfg, int n_coords,
                  double eps, std::uint64_t seed) {
  if (!(eps > 0.0))
    throw ConfigError("finite-difference step must be > 0");
  if (n_coords < 1)
    throw ConfigError("n_coords must be >= 1");
  const GradBundle g = gradients(spec, theta, env, cfg);
  const double floor_J = 1e-8 * std::max(1.0, g.grad_J.lpNorm<Eigen::Infinity>());
  const double floor_Jc = 1e-8 * std::max(1.0, g.grad_Jc.lpNorm<Eigen::Infinity>());
  auto rel = [](double a, double f, double floor) {
    const double diff = std::abs(a - f);
    if (diff == 0.0)
      return 0.0;
    return diff / std::max({std::abs(a), std::abs(f), floor});
  };

  FdReport report;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, theta.size() - 1);
  for (int k = 0; k < n_coords; ++k) {
    const Eigen::Index i = pick(rng);
    report.coords.push_back(i);
    ParamVector plus = theta, minus = theta;
    plus(i) += eps;
    minus(i) -= eps;
    const Objectives op = objectives(spec, plus, env, cfg);
    const Objectives om = objectives(spec, minus, env, cfg);
    const double fd_J = (op.J - om.J) / (2.0 * eps);
    const double fd_Jc = (op.Jc - om.Jc) / (2.0 * eps);
    report.max_rel_error_J =
        std::max(report.max_rel_error_J, rel(g.grad_J(i), fd_J, floor_J));
    report.max_rel_error_Jc =
        std::max(report.max_rel_error_Jc, rel(g.grad_Jc(i), fd_Jc, floor_Jc));
  }
  return report;
}

} // namespace plo
