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

#include "plo/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

namespace plo {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
  case ControllerKind::Penalty:
    return "penalty";
  case ControllerKind::DualAscent:
    return "dual";
  case ControllerKind::Pid:
    return "pid";
  case ControllerKind::Plo:
    return "plo";
  }
  return "unknown";
}

ControllerKind controller_kind_from_string(std::string_view name) {
  if (name == "penalty")
    return ControllerKind::Penalty;
  if (name == "dual")
    return ControllerKind::DualAscent;
  if (name == "pid")
    return ControllerKind::Pid;
  if (name == "plo")
    return ControllerKind::Plo;
  throw ConfigError("unknown controller '" + std::string(name) +
                    "' (expected penalty | dual | pid | plo)");
}

void PloConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw ConfigError("PLO learning rate must be > 0");
  qp_settings().validate();
}

MfocpQpSettings<double> PloConfig::qp_settings() const {
  MfocpQpSettings<double> s;
  s.horizon = horizon;
  s.regularization = regularization;
  s.lambda_max = lambda_max;
  s.tolerance = qp_tolerance;
  s.max_iterations = qp_max_iterations;
  return s;
}

void ControllerConfig::validate() const {
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!(nonneg(kp) && nonneg(ki) && nonneg(kd)))
    throw ConfigError("controller gains must be finite and >= 0");
  if (!nonneg(penalty_ratio))
    throw ConfigError("controller.penalty_ratio must be >= 0");
  if (!(lambda_max > 0.0))
    throw ConfigError("controller.lambda_max must be > 0");
  if (!(nonneg(lambda_init) && lambda_init <= lambda_max))
    throw ConfigError("controller.lambda_init must be in [0, lambda_max]");
  if (kind == ControllerKind::Plo)
    plo.validate();
}

namespace {

double clip(double v, double hi) { return std::clamp(v, 0.0, hi); }

double integral_cap(const ControllerConfig &cfg) {
  return cfg.ki > 0.0 ? cfg.lambda_max / cfg.ki
                      : std::numeric_limits<double>::infinity();
}

void accumulate(ControllerState &state, const ControllerConfig &cfg, double error) {
  state.integral = std::clamp(state.integral + error, 0.0, integral_cap(cfg));
}

} // namespace

ControllerState make_controller_state(const ControllerConfig &cfg) {
  ControllerState state;
  state.lambda = clip(cfg.lambda_init, cfg.lambda_max);
  state.integral = cfg.ki > 0.0 ? state.lambda / cfg.ki : 0.0;
  return state;
}

double penalty_update(ControllerState &state, const ControllerConfig &cfg,
                      double error) {
  const double raw =
      cfg.penalty_proportional ? cfg.kp * std::max(error, 0.0) : cfg.penalty_ratio;
  state.prev_error = error;
  state.lambda = clip(raw, cfg.lambda_max);
  return state.lambda;
}

double dual_ascent_update(ControllerState &state, const ControllerConfig &cfg,
                          double error) {
  // lambda_k = clip(lambda_{k-1} + ki e_k) written as ki * (clamped error sum).
  state.prev_error = error;
  if (cfg.ki == 0.0)
    return state.lambda;
  accumulate(state, cfg, error);
  state.lambda = clip(cfg.ki * state.integral, cfg.lambda_max);
  return state.lambda;
}

double pid_update(ControllerState &state, const ControllerConfig &cfg,
                  double error) {
  accumulate(state, cfg, error);
  const double derivative = std::max(0.0, error - state.prev_error);
  state.prev_error = error;
  state.lambda = clip(cfg.kp * error + cfg.ki * state.integral + cfg.kd * derivative,
                      cfg.lambda_max);
  return state.lambda;
}

PredictionModel prediction_model(const GradBundle &bundle, double learning_rate) {
  PredictionModel model;
  model.error = bundle.Jc;
  model.drift = learning_rate * bundle.grad_Jc.dot(bundle.grad_J);
  model.gain = learning_rate * bundle.grad_Jc.squaredNorm();
  return model;
}

double plo_update(ControllerState &state, const PloConfig &cfg,
                  const PredictionModel &model) {
  const auto settings = cfg.qp_settings();
  // Warm start: previous plan shifted left by one, last entry repeated.
  Vector warm;
  if (state.plan.size() == settings.horizon) {
    warm.resize(settings.horizon);
    warm.head(settings.horizon - 1) = state.plan.tail(settings.horizon - 1);
    warm(settings.horizon - 1) = state.plan(settings.horizon - 1);
  }
  MfocpQpResult<double> sol;
  if (model.gain == 0.0 && settings.regularization == 0.0) {
    // The multiplier cannot move the prediction; keep it at zero.
    sol.lambda = Vector::Zero(settings.horizon);
    sol.converged = true;
  } else {
    sol = solve_mfocp_qp<double>(model, settings, warm.size() ? &warm : nullptr);
  }
  if (!sol.converged)
    std::cerr << "warning: MFOCP QP stopped after " << sol.iterations
              << " iterations without meeting tolerance; using last iterate\n";
  state.plan = sol.lambda;
  state.qp_iterations = sol.iterations;
  state.qp_converged = sol.converged;
  state.prev_error = model.error;
  state.lambda = clip(sol.lambda(0), cfg.lambda_max);
  return state.lambda;
}

double plo_update(ControllerState &state, const PloConfig &cfg,
                  const GradBundle &bundle) {
  if (!bundle.grad_J.allFinite() || !bundle.grad_Jc.allFinite())
    throw ConfigError("gradient bundle is not finite");
  return plo_update(state, cfg, prediction_model(bundle, cfg.learning_rate));
}

double next_multiplier(ControllerState &state, const ControllerConfig &cfg,
                       const GradBundle &bundle) {
  switch (cfg.kind) {
  case ControllerKind::Penalty:
    return penalty_update(state, cfg, bundle.Jc);
  case ControllerKind::DualAscent:
    return dual_ascent_update(state, cfg, bundle.Jc);
  case ControllerKind::Pid:
    return pid_update(state, cfg, bundle.Jc);
  case ControllerKind::Plo: {
    PloConfig plo = cfg.plo;
    plo.lambda_max = cfg.lambda_max;
    return plo_update(state, plo, bundle);
  }
  }
  return state.lambda;
}

} // namespace plo
