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

#include "plo/trainer.hpp"
#include "plo/checkpoint.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace plo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

void TrainConfig::validate() const {
  if (iterations < 1)
    throw ConfigError("train.iterations must be >= 1");
  if (!(learning_rate >= 0.0))
    throw ConfigError("train.learning_rate must be >= 0");
  if (checkpoint_period < 1)
    throw ConfigError("train.checkpoint_period must be >= 1");
  if (horizon < 1)
    throw ConfigError("rollout.horizon must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0))
    throw ConfigError("rollout.discount must be in (0, 1]");
  if (batch_size < 1)
    throw ConfigError("rollout.batch_size must be >= 1");
  controller.validate();
}

std::uint64_t batch_seed(std::uint64_t master, int iteration) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(iteration)));
}

StepOutcome train_step(const PolicySpec &spec, const ParamVector &theta,
                       ControllerState &state, const EnvModel &env,
                       const TrainConfig &cfg, int iteration) {
  if (!theta.allFinite())
    throw DivergedRollout(0, "policy parameters are not finite");
  const auto start = std::chrono::steady_clock::now();

  RolloutConfig rc;
  rc.horizon = cfg.horizon;
  rc.discount = cfg.discount;
  rc.seed = batch_seed(cfg.seed, iteration);
  rc.initial_states = sample_initial_states(cfg.box ? *cfg.box : SamplingBox::for_env(env),
                                            cfg.batch_size, rc.seed);
  const GradBundle bundle = gradients(spec, theta, env, rc);
  if (!bundle.grad_J.allFinite() || !bundle.grad_Jc.allFinite())
    throw DivergedRollout(0, "non-finite policy gradient");

  ControllerConfig controller = cfg.controller;
  controller.plo.learning_rate = cfg.learning_rate;
  if (controller.kind == ControllerKind::Plo) {
    const PredictionModel m = prediction_model(bundle, cfg.learning_rate);
    if (!std::isfinite(m.gain) || !std::isfinite(m.drift))
      throw DivergedRollout(0, "multiplier prediction overflowed");
  }
  const double lambda = next_multiplier(state, controller, bundle);

  StepOutcome out;
  out.theta = theta + cfg.learning_rate * (bundle.grad_J - lambda * bundle.grad_Jc);
  out.row.iter = iteration;
  out.row.J = bundle.J;
  out.row.Jc = bundle.Jc;
  out.row.lambda = lambda;
  out.row.grad_J_norm = bundle.grad_J.norm();
  out.row.grad_Jc_norm = bundle.grad_Jc.norm();
  if (cfg.record_time)
    out.row.ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  return out;
}

std::filesystem::path checkpoint_name(const std::filesystem::path &dir, int iteration) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "checkpoint_%06d.plo", iteration);
  return dir / buf;
}

TrainResult train(const PolicySpec &spec, const ParamVector &theta0,
                  const EnvModel &env, const TrainConfig &cfg,
                  const std::filesystem::path &checkpoint_dir,
                  const std::function<void(const TrainRow &)> &on_row) {
  cfg.validate();
  env.validate();
  spec.validate();
  if (spec.input_dim != env.state_dim() || spec.output_dim != env.action_dim())
    throw ConfigError("policy dimensions do not match the environment");

  TrainResult result;
  result.theta = theta0;
  ControllerState state = make_controller_state(cfg.controller);
  auto save = [&](const std::filesystem::path &path, int iteration) {
    save_checkpoint(path, Checkpoint{spec, static_cast<std::uint64_t>(iteration),
                                     result.theta});
    result.checkpoints.push_back(path);
  };

  for (int k = 0; k < cfg.iterations; ++k) {
    StepOutcome step;
    try {
      step = train_step(spec, result.theta, state, env, cfg, k);
      if (!step.theta.allFinite())
        throw DivergedRollout(0, "policy update produced non-finite parameters");
    } catch (const DivergedRollout &) {
      if (!checkpoint_dir.empty()) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "checkpoint_%06d_last_good.plo", k);
        save(checkpoint_dir / buf, k);
      }
      throw;
    }
    result.theta = std::move(step.theta);
    result.record.push_back(step.row);
    if (on_row)
      on_row(step.row);
    const int done = k + 1;
    if (!checkpoint_dir.empty() &&
        (done % cfg.checkpoint_period == 0 || done == cfg.iterations))
      save(checkpoint_name(checkpoint_dir, done), done);
  }
  return result;
}

void write_train_csv(const std::filesystem::path &path, const TrainRecord &record) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << "iter,J,Jc,lambda,grad_J_norm,grad_Jc_norm,ms\n";
  for (const auto &r : record)
    out << r.iter << ',' << format_double(r.J) << ',' << format_double(r.Jc) << ','
        << format_double(r.lambda) << ',' << format_double(r.grad_J_norm) << ','
        << format_double(r.grad_Jc_norm) << ',' << format_double(r.ms) << '\n';
  if (!out)
    throw IoError("failed writing " + path.string());
}

} // namespace plo
