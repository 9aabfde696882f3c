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
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace plo;
using plo::test::max_rel_error;
using plo::test::ScopedEnv;

namespace {

PolicySpec spec_for(const EnvModel &env, int layers = 2, std::uint64_t seed = 0) {
  PolicySpec spec;
  spec.input_dim = env.state_dim();
  spec.hidden_layers = layers;
  spec.init_seed = seed;
  return spec;
}

RolloutConfig config(const Matrix &states, int horizon = 80, double discount = 1.0) {
  RolloutConfig cfg;
  cfg.horizon = horizon;
  cfg.discount = discount;
  cfg.initial_states = states;
  return cfg;
}

// Forward-mode sensitivities of the unrolled closed loop x' = (A + B k^T) x + B b.
struct LinearOracle {
  double J = 0, Jc = 0;
  Vector grad_J, grad_Jc;
};

LinearOracle linear_oracle(const EnvModel &env, const Vector &k, double b, const Vector &x0,
                           int horizon, double discount) {
  Matrix A{{1.0, env.dt}, {0.0, 1.0}};
  Vector B{{0.0, env.dt}};
  LinearOracle out;
  out.grad_J = Vector::Zero(3);
  out.grad_Jc = Vector::Zero(3);
  Vector x = x0;
  Matrix S = Matrix::Zero(2, 3);
  double w = 1.0;
  for (int t = 0; t < horizon; ++t) {
    out.J += w * -x.squaredNorm();
    out.grad_J += w * -2.0 * S.transpose() * x;
    const double v = x(0);
    const double slope = v < 1.0 ? -1.0 : (v > 5.0 ? 1.0 : 0.0);
    out.Jc += w * (v < 1.0 ? 1.0 - v : (v > 5.0 ? v - 5.0 : 0.0));
    out.grad_Jc += w * slope * S.row(0).transpose();
    const double u = k.dot(x) + b;
    Vector du(3);
    du << x(0), x(1), 1.0;
    const Matrix closed = A + B * k.transpose();
    S = (closed * S + B * du.transpose()).eval();
    x = A * x + B * u;
    w *= discount;
  }
  return out;
}

} // namespace

TEST_SUITE("rollout") {

TEST_CASE("zero policy at a safe fixed point") {
  const EnvModel env = EnvModel::double_integrator();
  const PolicySpec spec = spec_for(env);
  const ParamVector zero = ParamVector::Zero(spec.param_count());
  const Trajectory traj = rollout(spec, zero, env, Vector{{3.0, 0.0}}, config(Matrix(2, 1)));
  CHECK(traj.states.cols() == 81);
  for (int t = 0; t <= 80; ++t) {
    CHECK(traj.states(0, t) == 3.0);
    CHECK(traj.states(1, t) == 0.0);
  }
  CHECK((traj.rewards.array() == -9.0).all());
  CHECK(traj.costs.isZero(0.0));
}

TEST_CASE("zero policy in the unsafe region keeps a constant cost") {
  const EnvModel env = EnvModel::double_integrator();
  const PolicySpec spec = spec_for(env);
  const ParamVector zero = ParamVector::Zero(spec.param_count());
  const Trajectory traj = rollout(spec, zero, env, Vector{{0.5, 0.0}}, config(Matrix(2, 1)));
  CHECK((traj.costs.array() == 0.5).all());
}

TEST_CASE("a one-step horizon records one transition") {
  const EnvModel env = EnvModel::cartpole();
  const PolicySpec spec = spec_for(env, 2, 4);
  const ParamVector theta = init_params(spec);
  const Vector x0{{0.2, 0.0, 0.1, 0.0}};
  const Trajectory traj = rollout(spec, theta, env, x0, config(Matrix(4, 1), 1));
  CHECK(traj.states.cols() == 2);
  CHECK(traj.actions.size() == 1);
  CHECK(traj.rewards.size() == 1);
  CHECK(traj.costs.size() == 1);
  CHECK(traj.states.col(1) == step(env, x0, traj.actions(0)));
}

TEST_CASE("trajectory follows the saturated dynamics") {
  const EnvModel env = EnvModel::double_integrator();
  const PolicySpec spec = spec_for(env, 2, 11);
  const ParamVector theta = 5.0 * init_params(spec);
  const Trajectory traj = rollout(spec, theta, env, Vector{{2.0, 1.0}}, config(Matrix(2, 1)));
  for (int t = 0; t < 80; ++t) {
    const Vector x = traj.states.col(t);
    CHECK(traj.states.col(t + 1) == step(env, x, traj.actions(t)));
    CHECK(traj.rewards(t) == doctest::Approx(reward(env, x, traj.actions(t))).epsilon(1e-15));
    CHECK(traj.costs(t) == cost(env, x));
  }
}

TEST_CASE("objectives of the zero policy") {
  const EnvModel env = EnvModel::double_integrator();
  const PolicySpec spec = spec_for(env);
  const ParamVector zero = ParamVector::Zero(spec.param_count());
  const Objectives safe = objectives(spec, zero, env, config(Matrix{{3.0}, {0.0}}));
  CHECK(safe.J == -720.0);
  CHECK(safe.Jc == 0.0);
  const Objectives unsafe = objectives(spec, zero, env, config(Matrix{{0.5}, {0.0}}));
  CHECK(unsafe.Jc == 40.0);
  const Objectives both = objectives(spec, zero, env, config(Matrix{{3.0, 0.5}, {0.0, 0.0}}));
  CHECK(both.Jc == 20.0);
}

TEST_CASE("discount weights later steps") {
  const EnvModel env = EnvModel::double_integrator();
  const PolicySpec spec = spec_for(env);
  const ParamVector zero = ParamVector::Zero(spec.param_count());
  const Objectives o = objectives(spec, zero, env, config(Matrix{{3.0}, {0.0}}, 3, 0.5));
  CHECK(o.J == doctest::Approx(-9.0 * 1.75).epsilon(1e-15));
}

TEST_CASE("safe batches have an exactly zero constraint gradient") {
  const EnvModel env = EnvModel::double_integrator();
  const PolicySpec spec = spec_for(env, 2, 2);
  SamplingBox box;
  box.lo = Vector{{2.0, -0.2}};
  box.hi = Vector{{4.0, 0.2}};
  const RolloutConfig cfg = config(sample_initial_states(box, 40, 3));
  for (double scale : {0.0, 1e-3}) {
    const ParamVector theta = scale * init_params(spec);
    const GradBundle g = gradients(spec, theta, env, cfg);
    REQUIRE(g.Jc == 0.0);
    CHECK(g.grad_Jc.isZero(0.0));
    CHECK(g.grad_J.size() == spec.param_count());
  }
}

TEST_CASE("gradient values agree with the objectives") {
  const EnvModel env = EnvModel::cartpole();
  const PolicySpec spec = spec_for(env, 2, 1);
  const ParamVector theta = init_params(spec);
  const RolloutConfig cfg = config(sample_initial_states(SamplingBox::for_env(env), 20, 4));
  const Objectives o = objectives(spec, theta, env, cfg);
  const GradBundle g = gradients(spec, theta, env, cfg);
  CHECK(g.J == doctest::Approx(o.J).epsilon(1e-13));
  CHECK(g.Jc == doctest::Approx(o.Jc).epsilon(1e-13));
  CHECK(g.Jc >= 0.0);
}

TEST_CASE("adjoint gradients match finite differences on both environments") {
  for (const EnvModel &env : {EnvModel::double_integrator(), EnvModel::cartpole()}) {
    CAPTURE(to_string(env.kind));
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const PolicySpec spec = spec_for(env, 2, seed);
      const ParamVector theta = init_params(spec);
      const RolloutConfig cfg =
          config(sample_initial_states(SamplingBox::for_env(env), 16, 100 + seed));
      const FdReport report = fd_check(spec, theta, env, cfg, 5, 1e-5, seed);
      CHECK(report.coords.size() == 5);
      CHECK(report.max_rel_error() <= 1e-4);
    }
  }
}

TEST_CASE("a two-step horizon matches the hand chain rule") {
  const EnvModel env = EnvModel::double_integrator(0.05, 100.0);
  const PolicySpec spec = spec_for(env, 0);
  const ParamVector theta{{0.3, -0.8, 0.1}};
  const Vector x0{{2.0, 1.5}};
  const GradBundle g = gradients(spec, theta, env, config(x0, 2));
  const double u0 = theta(0) * x0(0) + theta(1) * x0(1) + theta(2);
  const double v1 = x0(1) + env.dt * u0;
  const Vector expected = -2.0 * v1 * env.dt * Vector{{x0(0), x0(1), 1.0}};
  CHECK(max_rel_error(g.grad_J, expected) <= 1e-14);
  CHECK(g.grad_Jc.isZero(0.0));

  const GradBundle one = gradients(spec, theta, env, config(x0, 1));
  CHECK(one.J == -x0.squaredNorm());
  CHECK(one.grad_J.isZero(0.0));
}

TEST_CASE("linear policy gradients match the unrolled linear system") {
  const EnvModel env = EnvModel::double_integrator(0.05, 1e6);
  const PolicySpec spec = spec_for(env, 0);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> gain(-1.5, 0.0), bias(-0.3, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    const ParamVector theta{{gain(rng), gain(rng), bias(rng)}};
    const Matrix X = sample_initial_states(SamplingBox::for_env(env), 5, trial);
    const double discount = trial % 2 ? 0.97 : 1.0;
    const GradBundle g = gradients(spec, theta, env, config(X, 80, discount));
    LinearOracle mean;
    mean.grad_J = Vector::Zero(3);
    mean.grad_Jc = Vector::Zero(3);
    for (int b = 0; b < X.cols(); ++b) {
      const LinearOracle o =
          linear_oracle(env, theta.head(2), theta(2), X.col(b), 80, discount);
      mean.J += o.J / 5;
      mean.Jc += o.Jc / 5;
      mean.grad_J += o.grad_J / 5;
      mean.grad_Jc += o.grad_Jc / 5;
    }
    CHECK(plo::test::rel_error(g.J, mean.J) <= 1e-12);
    CHECK(std::abs(g.Jc - mean.Jc) <= 1e-12 * (1 + mean.Jc));
    CHECK(max_rel_error(g.grad_J, mean.grad_J) <= 1e-10);
    CHECK(max_rel_error(g.grad_Jc, mean.grad_Jc, 1e-9) <= 1e-10);
  }
}

TEST_CASE("gradients do not depend on the worker count") {
  const EnvModel env = EnvModel::cartpole();
  const PolicySpec spec = spec_for(env, 2, 5);
  const ParamVector theta = init_params(spec);
  const RolloutConfig cfg = config(sample_initial_states(SamplingBox::for_env(env), 100, 6));
  GradBundle a, b;
  {
    ScopedEnv threads("PLO_THREADS", "1");
    a = gradients(spec, theta, env, cfg);
  }
  {
    ScopedEnv threads("PLO_THREADS", "4");
    b = gradients(spec, theta, env, cfg);
  }
  CHECK(a.J == b.J);
  CHECK(a.Jc == b.Jc);
  CHECK(a.grad_J == b.grad_J);
  CHECK(a.grad_Jc == b.grad_Jc);
}

TEST_CASE("initial state sampling is seeded and stays in the box") {
  const EnvModel env = EnvModel::cartpole();
  const SamplingBox box = SamplingBox::for_env(env);
  const Matrix a = sample_initial_states(box, 64, 9);
  CHECK(a == sample_initial_states(box, 64, 9));
  CHECK(a != sample_initial_states(box, 64, 10));
  for (int j = 0; j < a.cols(); ++j) {
    CHECK((a.col(j).array() >= box.lo.array()).all());
    CHECK((a.col(j).array() <= box.hi.array()).all());
  }
  CHECK(a.row(1).isZero(0.0));
  CHECK(a.row(3).isZero(0.0));
  CHECK_THROWS_AS(sample_initial_states(box, 0, 1), ConfigError);
}

TEST_CASE("invalid rollout settings are rejected") {
  const EnvModel env = EnvModel::double_integrator();
  const PolicySpec spec = spec_for(env);
  const ParamVector theta = init_params(spec);
  const Matrix X{{3.0}, {0.0}};
  CHECK_THROWS_AS(objectives(spec, theta, env, config(X, 0)), ConfigError);
  CHECK_THROWS_AS(gradients(spec, theta, env, config(X, 0)), ConfigError);
  CHECK_THROWS_AS(objectives(spec, theta, env, config(X, 10, 0.0)), ConfigError);
  CHECK_THROWS_AS(objectives(spec, theta, env, config(Matrix(2, 0))), ConfigError);
  CHECK_THROWS_AS(objectives(spec, theta, env, config(Matrix::Zero(4, 1))), ConfigError);
  CHECK_THROWS_AS(fd_check(spec, theta, env, config(X), 5, 0.0), ConfigError);
  CHECK_THROWS_AS(fd_check(spec, theta, env, config(X), 0, 1e-5), ConfigError);
}

TEST_CASE("a non-finite state reports the diverging step") {
  const EnvModel env = EnvModel::double_integrator();
  const PolicySpec spec = spec_for(env, 0);
  // u = inf * x1 is finite after saturation until x1 hits 0 exactly at step 1.
  const ParamVector theta{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  const Vector x0{{-0.1, 2.0}};
  try {
    rollout(spec, theta, env, x0, config(x0, 10));
    FAIL("expected DivergedRollout");
  } catch (const DivergedRollout &e) {
    CHECK(e.step() == 2);
    CHECK(std::string(e.what()).find("step 2") != std::string::npos);
  }
  CHECK_THROWS_AS(gradients(spec, theta, env, config(x0, 10)), DivergedRollout);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rollout(spec, theta, env, Vector{{nan, 0.0}}, config(x0)), DivergedRollout);
}

TEST_CASE("gradients are deterministic") {
  const EnvModel env = EnvModel::double_integrator();
  const PolicySpec spec = spec_for(env, 2, 7);
  const ParamVector theta = init_params(spec);
  const RolloutConfig cfg = config(sample_initial_states(SamplingBox::for_env(env), 64, 7));
  const GradBundle a = gradients(spec, theta, env, cfg);
  const GradBundle b = gradients(spec, theta, env, cfg);
  CHECK(a.grad_J == b.grad_J);
  CHECK(a.grad_Jc == b.grad_Jc);
}

}
