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

#ifndef PLO_BENCH_HPP
#define PLO_BENCH_HPP

#include "plo/multiplier.hpp"
#include "plo/theory.hpp"

#include <filesystem>
#include <vector>

namespace plo {

/**
 * Closed-loop multiplier trace on a quadratic problem with the inner
 * minimization solved exactly: theta_k = theta(lambda_k),
 * e_k = J_c(theta_k), lambda_{k+1} = controller(e_k).
 */
struct ControllerTrace {
  Vector lambda;
  Vector error;
  Vector gap; // |e_k - e*|
  double lambda_star = 0;
  double error_star = 0; // J_c(theta(lambda*)), 0 for active problems

  /// First k with gap_k <= tol, or -1.
  int steps_to(double tol) const;
};

/**
 * The predictive controller predicts with the exact local linearization of
 * the dual slope: gain = -dJ_c(theta(lambda))/dlambda at lambda_k and
 * drift = gain * lambda_k, so that e_1 = e_k - gain (lambda_0 - lambda_k).
 */
PredictionModel exact_linearization(const QuadraticProblem<double> &prob, double lambda);

ControllerTrace run_controller_trace(const QuadraticProblem<double> &prob,
                                     const ControllerConfig &cfg, int steps);

struct SyntheticRun {
  int instance = 0;
  int dim = 0;
  bool active = false;
  std::vector<ControllerConfig> controllers;
  std::vector<ControllerTrace> traces; // one per controller
};

/// Traces every controller on n_instances suite problems (in parallel).
std::vector<SyntheticRun> run_synthetic_study(std::uint64_t seed, int n_instances,
                                              const std::vector<ControllerConfig> &controllers,
                                              int steps);

/// CSV header: k,lambda,error,gap
void write_trace_csv(const std::filesystem::path &path, const ControllerTrace &trace);

} // namespace plo

#endif // PLO_BENCH_HPP
