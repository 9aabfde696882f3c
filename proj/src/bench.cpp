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

#include "plo/bench.hpp"
#include "plo/parallel.hpp"

#include <cmath>
#include <fstream>

namespace plo {

int ControllerTrace::steps_to(double tol) const {
  for (Eigen::Index k = 0; k < gap.size(); ++k)
    if (gap(k) <= tol)
      return static_cast<int>(k);
  return -1;
}

PredictionModel exact_linearization(const QuadraticProblem<double> &prob, double lambda) {
  PredictionModel model;
  model.error = dual_slope(prob, lambda);
  model.gain = -constraint_derivative(prob, lambda);
  model.drift = model.gain * lambda;
  return model;
}

ControllerTrace run_controller_trace(const QuadraticProblem<double> &prob,
                                     const ControllerConfig &cfg, int steps) {
  if (steps < 1)
    throw ConfigError("trace length must be >= 1");
  cfg.validate();
  ControllerTrace trace;
  const auto star = solve_multiplier(prob);
  trace.lambda_star = star.lambda;
  trace.error_star = star.lambda > 0 ? 0.0 : star.slope;
  trace.lambda.resize(steps);
  trace.error.resize(steps);
  trace.gap.resize(steps);

  ControllerState state = make_controller_state(cfg);
  PloConfig plo = cfg.plo;
  plo.lambda_max = cfg.lambda_max;
  for (int k = 0; k < steps; ++k) {
    const double lambda = state.lambda;
    const double e = dual_slope(prob, lambda);
    trace.lambda(k) = lambda;
    trace.error(k) = e;
    trace.gap(k) = std::abs(e - trace.error_star);
    switch (cfg.kind) {
    case ControllerKind::Penalty:
      penalty_update(state, cfg, e);
      break;
    case ControllerKind::DualAscent:
      dual_ascent_update(state, cfg, e);
      break;
    case ControllerKind::Pid:
      pid_update(state, cfg, e);
      break;
    case ControllerKind::Plo:
      plo_update(state, plo, exact_linearization(prob, lambda));
      break;
    }
  }
  return trace;
}

std::vector<SyntheticRun> run_synthetic_study(std::uint64_t seed, int n_instances,
                                              const std::vector<ControllerConfig> &controllers,
                                              int steps) {
  if (n_instances < 1)
    throw ConfigError("synthetic study needs >= 1 instance");
  std::vector<SyntheticRun> runs(n_instances);
  parallel_for(n_instances, [&](int i) {
    const QuadraticProblem<double> prob = suite_instance(seed, i);
    SyntheticRun &run = runs[i];
    run.instance = i;
    run.dim = prob.dim();
    run.active = prob.active();
    run.controllers = controllers;
    for (const auto &c : controllers)
      run.traces.push_back(run_controller_trace(prob, c, steps));
  });
  return runs;
}

void write_trace_csv(const std::filesystem::path &path, const ControllerTrace &trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << "k,lambda,error,gap\n";
  for (Eigen::Index k = 0; k < trace.lambda.size(); ++k)
    out << k << ',' << format_double(trace.lambda(k)) << ','
        << format_double(trace.error(k)) << ',' << format_double(trace.gap(k)) << '\n';
  if (!out)
    throw IoError("failed writing " + path.string());
}

} // namespace plo
