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

#ifndef PLO_ENVS_HPP
#define PLO_ENVS_HPP

#include "plo/common.hpp"

#include <string>
#include <string_view>

namespace plo {

enum class EnvKind { DoubleIntegrator, Cartpole };

std::string_view to_string(EnvKind kind);
EnvKind env_kind_from_string(std::string_view name);

/**
 * Forward-Euler discretization of one of the two control tasks.
 *
 * Double integrator: x = [x1, x2], x1' = x1 + dt*x2, x2' = x2 + dt*u.
 * Reward -x1^2 - x2^2, safe set x1 in [1, 5].
 *
 * Cartpole: x = [p, p_dot, phi, phi_dot] with the classic Gym equations of
 * motion (half pole length l). Reward -10*phi^2, safe set p in [-1, 1].
 *
 * Actions are saturated to [-u_max, u_max] inside step().
 */
struct EnvModel {
  EnvKind kind = EnvKind::DoubleIntegrator;
  double dt = 0.05;
  double u_max = 1.0;
  // Cartpole only.
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double gravity = 9.8;

  static EnvModel double_integrator(double dt = 0.05, double u_max = 1.0);
  static EnvModel cartpole(double dt = 0.02, double u_max = 10.0);

  int state_dim() const { return kind == EnvKind::DoubleIntegrator ? 2 : 4; }
  int action_dim() const { return 1; }

  /// Index of the state component the hinge cost acts on.
  int constrained_index() const { return 0; }
  double safe_lower() const { return kind == EnvKind::DoubleIntegrator ? 1.0 : -1.0; }
  double safe_upper() const { return kind == EnvKind::DoubleIntegrator ? 5.0 : 1.0; }

  /// Throws ConfigError unless dt, u_max and the physical parameters are > 0.
  void validate() const;
};

double saturate(const EnvModel &env, double u);

/// One Euler step. Throws DivergedRollout(0, ...) on non-finite input.
Vector step(const EnvModel &env, const Eigen::Ref<const Vector> &x, double u);

double reward(const EnvModel &env, const Eigen::Ref<const Vector> &x, double u);

/// Piecewise hinge; zero inside the safe set, distance to it outside.
double cost(const EnvModel &env, const Eigen::Ref<const Vector> &x);

struct StepJacobians {
  Matrix dfdx;  // state_dim x state_dim
  Vector dfdu;  // state_dim, zero when saturation binds
  Vector drdx;
  double drdu = 0.0;
  Vector dcdx;  // zero at the hinge kinks
};

StepJacobians jacobians(const EnvModel &env, const Eigen::Ref<const Vector> &x,
                        double u);

// Column-wise batched forms used by the rollout engine and the evaluator.
// X is state_dim x B, U is 1 x B (raw, unsaturated). No finiteness checks.
void step_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                const Eigen::Ref<const RowVector> &U, Eigen::Ref<Matrix> out);
void reward_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                  Eigen::Ref<RowVector> out);
void cost_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                Eigen::Ref<RowVector> out);

/// Vector-Jacobian product of step: dX = (df/dx)^T adj, dU = (df/du)^T adj.
void step_vjp_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                    const Eigen::Ref<const RowVector> &U,
                    const Eigen::Ref<const Matrix> &adj, Eigen::Ref<Matrix> dX,
                    Eigen::Ref<RowVector> dU);
void reward_grad_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                       Eigen::Ref<Matrix> out);
void cost_grad_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                     Eigen::Ref<Matrix> out);

} // namespace plo

#endif // PLO_ENVS_HPP
