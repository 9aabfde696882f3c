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

#ifndef PLO_MULTIPLIER_HPP
#define PLO_MULTIPLIER_HPP

#include "plo/common.hpp"
#include "plo/qp.hpp"
#include "plo/rollout.hpp"

#include <string_view>

namespace plo {

/**
 * Multiplier feedback controllers.
 *
 * Each controller maps the feedback error e_k = J_c(theta_k) (plus, for the
 * predictive controller, the gradient bundle at theta_k) to a multiplier
 * lambda_k in [0, lambda_max].
 */
enum class ControllerKind { Penalty, DualAscent, Pid, Plo };

std::string_view to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(std::string_view name);

struct PloConfig {
  int horizon = 20;
  double regularization = 1e-4;
  /// Step size of the predicted policy updates; the trainer keeps it equal to
  /// its own learning rate.
  double learning_rate = 1e-3;
  double lambda_max = 100.0;
  double qp_tolerance = 1e-12;
  int qp_max_iterations = 100000;

  void validate() const;
  MfocpQpSettings<double> qp_settings() const;
};

struct ControllerConfig {
  ControllerKind kind = ControllerKind::Plo;
  /// Penalty: fixed ratio, or lambda = kp * max(e, 0) when proportional.
  bool penalty_proportional = false;
  double penalty_ratio = 1.0;
  double kp = 1e-2;
  double ki = 1e-4;
  double kd = 1e-4;
  double lambda_init = 0.0;
  double lambda_max = 100.0;
  PloConfig plo;

  void validate() const;
};

/**
 * Per-controller memory.
 *
 * The integral term is stored as an error sum clamped to
 * [0, lambda_max / ki]; dual ascent and PID share this representation, which
 * makes PID with kp = kd = 0 reproduce dual ascent bit for bit.
 */
struct ControllerState {
  double lambda = 0.0;
  double integral = 0.0;
  double prev_error = 0.0;
  Vector plan; // last solved multiplier sequence (predictive controller)
  int qp_iterations = 0;
  bool qp_converged = true;
};

ControllerState make_controller_state(const ControllerConfig &cfg);

double penalty_update(ControllerState &state, const ControllerConfig &cfg,
                      double error);
double dual_ascent_update(ControllerState &state, const ControllerConfig &cfg,
                          double error);
double pid_update(ControllerState &state, const ControllerConfig &cfg,
                  double error);

/// Linearized prediction model of the constraint error from a bundle.
PredictionModel prediction_model(const GradBundle &bundle, double learning_rate);

/// Receding-horizon update from an explicit prediction model.
double plo_update(ControllerState &state, const PloConfig &cfg,
                  const PredictionModel &model);
/// Receding-horizon update: solves the MFOCP QP and applies its first entry.
double plo_update(ControllerState &state, const PloConfig &cfg,
                  const GradBundle &bundle);

/// Dispatches on cfg.kind; the error fed to the classic controllers is bundle.Jc.
double next_multiplier(ControllerState &state, const ControllerConfig &cfg,
                       const GradBundle &bundle);

} // namespace plo

#endif // PLO_MULTIPLIER_HPP
