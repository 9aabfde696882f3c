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

#include "plo/qp.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace plo;
using plo::test::rel_error;

namespace {

MfocpQpSettings<double> settings(int horizon, double R = 1e-4, double lambda_max = 100.0) {
  MfocpQpSettings<double> s;
  s.horizon = horizon;
  s.regularization = R;
  s.lambda_max = lambda_max;
  return s;
}

double closed_form_n1(const PredictionModel &m, double R, double lambda_max) {
  return std::clamp(m.gain * (m.error + m.drift) / (m.gain * m.gain + R), 0.0, lambda_max);
}

double brute_force_n2(const PredictionModel &m, double R, double step, double hi) {
  double best = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(std::round(hi / step));
  Vector l(2);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      l << i * step, j * step;
      best = std::min(best, mfocp_objective<double>(m, R, l));
    }
  return best;
}

PredictionModel random_model(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> e(0.0, 2.0), a(-0.5, 0.5), b(0.01, 1.0);
  return {e(rng), a(rng), b(rng)};
}

} // namespace

TEST_SUITE("qp") {

TEST_CASE("predicted errors follow the affine recursion") {
  const PredictionModel m{1.0, 0.2, 0.5};
  const Vector e = predicted_errors<double>(m, Vector{{0.0, 1.0, 2.0}});
  CHECK(e(0) == doctest::Approx(1.2));
  CHECK(e(1) == doctest::Approx(0.9));
  CHECK(e(2) == doctest::Approx(0.1));
  CHECK(mfocp_objective<double>(m, 0.1, Vector{{0.0, 1.0, 2.0}}) ==
        doctest::Approx(1.44 + 0.81 + 0.01 + 0.1 * 5.0));
}

TEST_CASE("single-step problem matches the closed form") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const PredictionModel m = random_model(rng);
    const auto res = solve_mfocp_qp(m, settings(1));
    CHECK(res.converged);
    const double expected = closed_form_n1(m, 1e-4, 100.0);
    if (expected == 0.0)
      CHECK(res.lambda(0) == 0.0);
    else
      CHECK(rel_error(res.lambda(0), expected) <= 1e-10);
  }
}

TEST_CASE("single-step closed form clips at lambda_max") {
  const PredictionModel m{5.0, 0.0, 0.1};
  const auto res = solve_mfocp_qp(m, settings(1, 1e-4, 2.0));
  CHECK(res.lambda(0) == 2.0);
}

TEST_CASE("two-step problem beats the brute-force grid") {
  const PredictionModel m{1.0, 0.0, 0.5};
  const auto res = solve_mfocp_qp(m, settings(2));
  CHECK(res.converged);
  CHECK(res.objective <= brute_force_n2(m, 1e-4, 0.05, 5.0) + 1e-6);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 30; ++i) {
    const PredictionModel r = random_model(rng);
    const auto s = solve_mfocp_qp(r, settings(2));
    CHECK(s.objective <= brute_force_n2(r, 1e-4, 0.05, 5.0) + 1e-6);
  }
}

TEST_CASE("zero gain gives the zero sequence") {
  const auto res = solve_mfocp_qp(PredictionModel{3.0, 0.7, 0.0}, settings(20));
  CHECK(res.lambda.size() == 20);
  CHECK(res.lambda.isZero(0.0));
  const auto idle = solve_mfocp_qp(PredictionModel{0.0, 0.0, 0.0}, settings(5));
  CHECK(idle.lambda.isZero(0.0));
}

TEST_CASE("positive error with no drift gives a positive first multiplier") {
  for (int n : {1, 5, 20, 50}) {
    const auto res = solve_mfocp_qp(PredictionModel{0.8, 0.0, 0.3}, settings(n, 1e-8));
    CHECK(res.lambda(0) > 0.0);
  }
}

TEST_CASE("solution is never worse than zero or the warm start") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    const PredictionModel m = random_model(rng);
    auto s = settings(20);
    s.max_iterations = 1 + i % 7;
    Vector warm(20);
    for (auto &v : warm)
      v = u(rng);
    const auto res = solve_mfocp_qp(m, s, &warm);
    CHECK(res.objective <= mfocp_objective<double>(m, s.regularization, Vector::Zero(20)));
    CHECK(res.objective <= mfocp_objective<double>(m, s.regularization, warm));
    CHECK((res.lambda.array() >= 0.0).all());
    CHECK((res.lambda.array() <= s.lambda_max).all());
  }
}

TEST_CASE("warm start out of the box is projected") {
  const PredictionModel m{1.0, 0.0, 0.5};
  Vector warm = Vector::Constant(3, 500.0);
  const auto res = solve_mfocp_qp(m, settings(3), &warm);
  CHECK((res.lambda.array() <= 100.0).all());
  const auto cold = solve_mfocp_qp(m, settings(3));
  CHECK(std::abs(res.objective - cold.objective) <= 1e-10);
}

TEST_CASE("first multiplier is non-decreasing in the current error") {
  for (double drift : {-0.2, 0.0, 0.3}) {
    double prev = -1.0;
    for (int i = 0; i <= 40; ++i) {
      const double e0 = 0.05 * i;
      const double first = solve_mfocp_qp(PredictionModel{e0, drift, 0.4}, settings(20)).lambda(0);
      CHECK(first >= prev - 1e-9);
      prev = first;
    }
  }
}

TEST_CASE("solution satisfies the box KKT conditions") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 30; ++i) {
    const PredictionModel m = random_model(rng);
    const auto s = settings(10, 1e-3, 1.0);
    const auto res = solve_mfocp_qp(m, s);
    REQUIRE(res.converged);
    // gradient by central differences of the objective
    const double h = 1e-6;
    for (int j = 0; j < 10; ++j) {
      Vector p = res.lambda, q = res.lambda;
      p(j) += h;
      q(j) -= h;
      const double g = (mfocp_objective<double>(m, s.regularization, p) -
                        mfocp_objective<double>(m, s.regularization, q)) / (2 * h);
      const double l = res.lambda(j);
      if (l <= 1e-9)
        CHECK(g >= -1e-6);
      else if (l >= 1.0 - 1e-9)
        CHECK(g <= 1e-6);
      else
        CHECK(std::abs(g) <= 1e-6);
    }
  }
}

TEST_CASE("cumulative-sum Gram norm matches an eigensolver") {
  for (int n : {1, 2, 3, 7, 20, 64}) {
    const Matrix L = Matrix::Ones(n, n).triangularView<Eigen::Lower>();
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(L.transpose() * L);
    CHECK(rel_error(cumulative_sum_gram_norm<double>(n), eig.eigenvalues().maxCoeff()) <= 1e-12);
  }
}

TEST_CASE("solver works in single precision") {
  PredictionModelT<float> m{1.0f, 0.0f, 0.5f};
  MfocpQpSettings<float> s;
  s.horizon = 1;
  s.tolerance = 1e-6f;
  const auto res = solve_mfocp_qp(m, s);
  CHECK(res.lambda(0) == doctest::Approx(0.5 / (0.25 + 1e-4)).epsilon(1e-4));
}

TEST_CASE("invalid settings are rejected") {
  const PredictionModel m{1.0, 0.0, 0.5};
  CHECK_THROWS_AS(solve_mfocp_qp(m, settings(0)), ConfigError);
  CHECK_THROWS_AS(solve_mfocp_qp(m, settings(3, -1.0)), ConfigError);
  CHECK_THROWS_AS(solve_mfocp_qp(m, settings(3, 1e-4, 0.0)), ConfigError);
  CHECK_THROWS_AS(solve_mfocp_qp(PredictionModel{1.0, 0.0, -0.1}, settings(3)), ConfigError);
  CHECK_THROWS_AS(solve_mfocp_qp(PredictionModel{1.0, 0.0, 0.0}, settings(3, 0.0)), ConfigError);
  CHECK_THROWS_AS(solve_mfocp_qp(PredictionModel{std::nan(""), 0.0, 0.5}, settings(3)),
                  ConfigError);
  auto s = settings(3);
  s.tolerance = 0.0;
  CHECK_THROWS_AS(solve_mfocp_qp(m, s), ConfigError);
}

}
