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

#include "plo/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace plo {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string_view to_string(EnvKind kind) {
  return kind == EnvKind::DoubleIntegrator ? "double_integrator" : "cartpole";
}

EnvKind env_kind_from_string(std::string_view name) {
  if (name == "double_integrator")
    return EnvKind::DoubleIntegrator;
  if (name == "cartpole")
    return EnvKind::Cartpole;
  throw ConfigError("unknown environment '" + std::string(name) + "'");
}

EnvModel EnvModel::double_integrator(double dt, double u_max) {
  EnvModel env;
  env.kind = EnvKind::DoubleIntegrator;
  env.dt = dt;
  env.u_max = u_max;
  return env;
}

EnvModel EnvModel::cartpole(double dt, double u_max) {
  EnvModel env;
  env.kind = EnvKind::Cartpole;
  env.dt = dt;
  env.u_max = u_max;
  return env;
}

void EnvModel::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(dt))
    throw ConfigError("env.dt must be > 0");
  if (!positive(u_max))
    throw ConfigError("env.u_max must be > 0");
  if (kind == EnvKind::Cartpole &&
      !(positive(cart_mass) && positive(pole_mass) && positive(half_length) &&
        positive(gravity)))
    throw ConfigError("cartpole masses, length and gravity must be > 0");
}

double saturate(const EnvModel &env, double u) {
  return std::clamp(u, -env.u_max, env.u_max);
}

namespace {

double hinge(double v, double lo, double hi) {
  if (v < lo)
    return lo - v;
  if (v > hi)
    return v - hi;
  return 0.0;
}

double hinge_slope(double v, double lo, double hi) {
  if (v < lo)
    return -1.0;
  if (v > hi)
    return 1.0;
  return 0.0;
}

double saturation_slope(const EnvModel &env, double u) {
  return std::abs(u) >= env.u_max ? 0.0 : 1.0;
}

struct CartpoleAccel {
  double p_ddot;
  double phi_ddot;
};

CartpoleAccel cartpole_accel(const EnvModel &env, double phi, double omega,
                             double force) {
  const double total = env.cart_mass + env.pole_mass;
  const double ml = env.pole_mass * env.half_length;
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double temp = (force + ml * omega * omega * s) / total;
  const double den =
      env.half_length * (4.0 / 3.0 - env.pole_mass * c * c / total);
  const double phi_ddot = (env.gravity * s - c * temp) / den;
  const double p_ddot = temp - ml * phi_ddot * c / total;
  return {p_ddot, phi_ddot};
}

// Partial derivatives of the cartpole accelerations w.r.t. (phi, omega, F).
struct CartpoleAccelGrad {
  double dp_dphi, dp_domega, dp_dforce;
  double dphi_dphi, dphi_domega, dphi_dforce;
};

CartpoleAccelGrad cartpole_accel_grad(const EnvModel &env, double phi,
                                      double omega, double force) {
  const double total = env.cart_mass + env.pole_mass;
  const double ml = env.pole_mass * env.half_length;
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double temp = (force + ml * omega * omega * s) / total;
  const double den =
      env.half_length * (4.0 / 3.0 - env.pole_mass * c * c / total);
  const double num = env.gravity * s - c * temp;
  const double phi_ddot = num / den;

  const double dtemp_dphi = ml * omega * omega * c / total;
  const double dtemp_domega = 2.0 * ml * omega * s / total;
  const double dtemp_dforce = 1.0 / total;
  const double dden_dphi = env.half_length * 2.0 * env.pole_mass * c * s / total;
  const double dnum_dphi = env.gravity * c + s * temp - c * dtemp_dphi;

  CartpoleAccelGrad g{};
  g.dphi_dphi = (dnum_dphi * den - num * dden_dphi) / (den * den);
  g.dphi_domega = -c * dtemp_domega / den;
  g.dphi_dforce = -c * dtemp_dforce / den;
  g.dp_dphi = dtemp_dphi - ml / total * (g.dphi_dphi * c - phi_ddot * s);
  g.dp_domega = dtemp_domega - ml * c / total * g.dphi_domega;
  g.dp_dforce = dtemp_dforce - ml * c / total * g.dphi_dforce;
  return g;
}

void check_dims(const EnvModel &env, Eigen::Index rows) {
  if (rows != env.state_dim())
    throw ConfigError("state has " + std::to_string(rows) +
                      " entries, environment expects " +
                      std::to_string(env.state_dim()));
}

} // namespace

Vector step(const EnvModel &env, const Eigen::Ref<const Vector> &x, double u) {
  check_dims(env, x.size());
  if (!x.allFinite() || !std::isfinite(u))
    throw DivergedRollout(0, "non-finite state or action passed to step");
  Matrix out(env.state_dim(), 1);
  RowVector uu(1);
  uu(0) = u;
  step_batch(env, x, uu, out);
  return out.col(0);
}

double reward(const EnvModel &env, const Eigen::Ref<const Vector> &x, double) {
  check_dims(env, x.size());
  if (env.kind == EnvKind::DoubleIntegrator)
    return -x(0) * x(0) - x(1) * x(1);
  return -10.0 * x(2) * x(2);
}

double cost(const EnvModel &env, const Eigen::Ref<const Vector> &x) {
  check_dims(env, x.size());
  return hinge(x(env.constrained_index()), env.safe_lower(), env.safe_upper());
}

StepJacobians jacobians(const EnvModel &env, const Eigen::Ref<const Vector> &x,
                        double u) {
  check_dims(env, x.size());
  const int n = env.state_dim();
  const double sat_slope = saturation_slope(env, u);
  StepJacobians jac;
  jac.dfdx = Matrix::Identity(n, n);
  jac.dfdu = Vector::Zero(n);
  jac.drdx = Vector::Zero(n);
  jac.dcdx = Vector::Zero(n);

  if (env.kind == EnvKind::DoubleIntegrator) {
    jac.dfdx(0, 1) = env.dt;
    jac.dfdu(1) = env.dt * sat_slope;
    jac.drdx << -2.0 * x(0), -2.0 * x(1);
  } else {
    const auto g = cartpole_accel_grad(env, x(2), x(3), saturate(env, u));
    jac.dfdx(0, 1) = env.dt;
    jac.dfdx(1, 2) = env.dt * g.dp_dphi;
    jac.dfdx(1, 3) = env.dt * g.dp_domega;
    jac.dfdx(2, 3) = env.dt;
    jac.dfdx(3, 2) = env.dt * g.dphi_dphi;
    jac.dfdx(3, 3) = 1.0 + env.dt * g.dphi_domega;
    jac.dfdu(1) = env.dt * g.dp_dforce * sat_slope;
    jac.dfdu(3) = env.dt * g.dphi_dforce * sat_slope;
    jac.drdx(2) = -20.0 * x(2);
  }
  const int ci = env.constrained_index();
  jac.dcdx(ci) = hinge_slope(x(ci), env.safe_lower(), env.safe_upper());
  return jac;
}

void step_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                const Eigen::Ref<const RowVector> &U, Eigen::Ref<Matrix> out) {
  const Eigen::Index batch = X.cols();
  if (env.kind == EnvKind::DoubleIntegrator) {
    for (Eigen::Index b = 0; b < batch; ++b) {
      const double u = saturate(env, U(b));
      const double x1 = X(0, b);
      const double x2 = X(1, b);
      out(0, b) = x1 + env.dt * x2;
      out(1, b) = x2 + env.dt * u;
    }
    return;
  }
  for (Eigen::Index b = 0; b < batch; ++b) {
    const double p = X(0, b), p_dot = X(1, b), phi = X(2, b), omega = X(3, b);
    const auto acc = cartpole_accel(env, phi, omega, saturate(env, U(b)));
    out(0, b) = p + env.dt * p_dot;
    out(1, b) = p_dot + env.dt * acc.p_ddot;
    out(2, b) = phi + env.dt * omega;
    out(3, b) = omega + env.dt * acc.phi_ddot;
  }
}

void reward_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                  Eigen::Ref<RowVector> out) {
  if (env.kind == EnvKind::DoubleIntegrator)
    out = -(X.row(0).array().square() + X.row(1).array().square());
  else
    out = -10.0 * X.row(2).array().square();
}

void cost_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                Eigen::Ref<RowVector> out) {
  const int ci = env.constrained_index();
  for (Eigen::Index b = 0; b < X.cols(); ++b)
    out(b) = hinge(X(ci, b), env.safe_lower(), env.safe_upper());
}

void step_vjp_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                    const Eigen::Ref<const RowVector> &U,
                    const Eigen::Ref<const Matrix> &adj, Eigen::Ref<Matrix> dX,
                    Eigen::Ref<RowVector> dU) {
  const double dt = env.dt;
  for (Eigen::Index b = 0; b < X.cols(); ++b) {
    const double sat_slope = saturation_slope(env, U(b));
    if (env.kind == EnvKind::DoubleIntegrator) {
      dX(0, b) = adj(0, b);
      dX(1, b) = dt * adj(0, b) + adj(1, b);
      dU(b) = dt * sat_slope * adj(1, b);
      continue;
    }
    const auto g = cartpole_accel_grad(env, X(2, b), X(3, b), saturate(env, U(b)));
    const double a0 = adj(0, b), a1 = adj(1, b), a2 = adj(2, b), a3 = adj(3, b);
    dX(0, b) = a0;
    dX(1, b) = dt * a0 + a1;
    dX(2, b) = dt * g.dp_dphi * a1 + a2 + dt * g.dphi_dphi * a3;
    dX(3, b) = dt * g.dp_domega * a1 + dt * a2 + (1.0 + dt * g.dphi_domega) * a3;
    dU(b) = sat_slope * dt * (g.dp_dforce * a1 + g.dphi_dforce * a3);
  }
}

void reward_grad_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                       Eigen::Ref<Matrix> out) {
  out.setZero();
  if (env.kind == EnvKind::DoubleIntegrator)
    out = -2.0 * X;
  else
    out.row(2) = -20.0 * X.row(2);
}

void cost_grad_batch(const EnvModel &env, const Eigen::Ref<const Matrix> &X,
                     Eigen::Ref<Matrix> out) {
  out.setZero();
  const int ci = env.constrained_index();
  for (Eigen::Index b = 0; b < X.cols(); ++b)
    out(ci, b) = hinge_slope(X(ci, b), env.safe_lower(), env.safe_upper());
}

} // namespace plo
