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

#ifndef PLO_QP_HPP
#define PLO_QP_HPP

#include "plo/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace plo {

/**
 * Affine prediction of the constraint error under a multiplier sequence:
 *
 *   e_{i+1} = e_i + drift - gain * lambda_i,   e_0 = error.
 *
 * Built from a gradient bundle as drift = eta <grad_Jc, grad_J> and
 * gain = eta |grad_Jc|^2, i.e. both gradients frozen at the current iterate.
 */
template <typename Scalar>
struct PredictionModelT {
  Scalar error = 0;
  Scalar drift = 0;
  Scalar gain = 0;
};
using PredictionModel = PredictionModelT<double>;

template <typename Scalar>
struct MfocpQpSettings {
  int horizon = 20;
  Scalar regularization = Scalar(1e-4);
  Scalar lambda_max = Scalar(100);
  /// Stop when |G| <= tolerance * (1 + |grad f(0)|), G the gradient mapping.
  Scalar tolerance = Scalar(1e-12);
  int max_iterations = 100000;

  void validate() const {
    if (horizon < 1)
      throw ConfigError("MPC horizon must be >= 1");
    if (!(regularization >= 0))
      throw ConfigError("MPC regularization must be >= 0");
    if (!(lambda_max > 0))
      throw ConfigError("lambda_max must be > 0");
    if (!(tolerance > 0) || max_iterations < 1)
      throw ConfigError("QP tolerance and iteration cap must be positive");
  }
};

template <typename Scalar>
struct MfocpQpResult {
  VectorX<Scalar> lambda;
  Scalar objective = 0;
  int iterations = 0;
  bool converged = false;
};

/// Predicted errors e_1..e_N for a multiplier sequence.
template <typename Scalar>
VectorX<Scalar> predicted_errors(const PredictionModelT<Scalar> &model,
                                 const Eigen::Ref<const VectorX<Scalar>> &lambda) {
  VectorX<Scalar> e(lambda.size());
  Scalar cur = model.error;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    cur = cur + model.drift - model.gain * lambda(i);
    e(i) = cur;
  }
  return e;
}

/// sum_{i=1..N} e_i^2 + R sum_{i=0..N-1} lambda_i^2.
template <typename Scalar>
Scalar mfocp_objective(const PredictionModelT<Scalar> &model, Scalar regularization,
                       const Eigen::Ref<const VectorX<Scalar>> &lambda) {
  return predicted_errors(model, lambda).squaredNorm() +
         regularization * lambda.squaredNorm();
}

/// Largest eigenvalue of L^T L for the N x N lower-triangular all-ones L.
template <typename Scalar>
Scalar cumulative_sum_gram_norm(int horizon) {
  const Scalar s = std::sin(std::numbers::pi_v<Scalar> / Scalar(2 * (2 * horizon + 1)));
  return Scalar(1) / (Scalar(4) * s * s);
}

/**
 * Minimizes the MFOCP quadratic over the box [0, lambda_max]^N by projected
 * gradient descent with step 1/L, L = 2 (gain^2 |L^T L| + R).
 *
 * The iteration starts from whichever of the warm start and the zero sequence
 * has the lower objective, and descent is monotone, so the result is never
 * worse than either. On hitting the iteration cap the last (best) iterate is
 * returned with converged = false.
 */
template <typename Scalar>
MfocpQpResult<Scalar> solve_mfocp_qp(const PredictionModelT<Scalar> &model,
                                     const MfocpQpSettings<Scalar> &settings,
                                     const VectorX<Scalar> *warm_start = nullptr) {
  settings.validate();
  if (!(model.gain >= 0) || !std::isfinite(model.gain) ||
      !std::isfinite(model.drift) || !std::isfinite(model.error))
    throw ConfigError("prediction model must be finite with gain >= 0");
  if (model.gain == 0 && settings.regularization == 0)
    throw ConfigError("MFOCP is degenerate: gain and regularization both zero");

  const int n = settings.horizon;
  const Scalar R = settings.regularization;
  const Scalar hi = settings.lambda_max;
  auto project = [&](VectorX<Scalar> &v) { v = v.cwiseMax(Scalar(0)).cwiseMin(hi); };
  auto objective = [&](const VectorX<Scalar> &v) {
    return mfocp_objective<Scalar>(model, R, v);
  };
  // grad = -2 gain * (reverse cumulative sum of e) + 2 R lambda
  auto gradient = [&](const VectorX<Scalar> &v) {
    const VectorX<Scalar> e = predicted_errors<Scalar>(model, v);
    VectorX<Scalar> g(n);
    Scalar tail = 0;
    for (int j = n - 1; j >= 0; --j) {
      tail += e(j);
      g(j) = Scalar(-2) * model.gain * tail + Scalar(2) * R * v(j);
    }
    return g;
  };

  MfocpQpResult<Scalar> result;
  result.lambda = VectorX<Scalar>::Zero(n);
  if (warm_start && warm_start->size() == n) {
    VectorX<Scalar> ws = *warm_start;
    project(ws);
    if (objective(ws) < objective(result.lambda))
      result.lambda = ws;
  }

  const Scalar lipschitz =
      Scalar(2) * (model.gain * model.gain * cumulative_sum_gram_norm<Scalar>(n) + R);
  const Scalar step = Scalar(1) / lipschitz;
  const Scalar threshold =
      settings.tolerance * (Scalar(1) + gradient(VectorX<Scalar>::Zero(n)).norm());

  for (int it = 0; it < settings.max_iterations; ++it) {
    VectorX<Scalar> next = result.lambda - step * gradient(result.lambda);
    project(next);
    const Scalar mapping = lipschitz * (next - result.lambda).norm();
    result.lambda = std::move(next);
    result.iterations = it + 1;
    if (mapping <= threshold) {
      result.converged = true;
      break;
    }
  }
  result.objective = objective(result.lambda);
  return result;
}

} // namespace plo

#endif // PLO_QP_HPP
