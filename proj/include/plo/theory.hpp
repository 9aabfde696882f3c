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

#ifndef PLO_THEORY_HPP
#define PLO_THEORY_HPP

#include "plo/common.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace plo {

/**
 * Strongly convex test problem with a closed-form dual curve:
 *
 *   -J(theta)  = (theta - a)^T P (theta - a)
 *   J_c(theta) = |theta - c|^2 - r^2
 *   L(theta, lambda) = -J(theta) + lambda J_c(theta)
 */
template <typename Scalar>
struct QuadraticProblem {
  MatrixX<Scalar> P;
  VectorX<Scalar> a;
  VectorX<Scalar> c;
  Scalar r = 1;

  int dim() const { return static_cast<int>(a.size()); }

  Scalar neg_reward(const VectorX<Scalar> &theta) const {
    const VectorX<Scalar> d = theta - a;
    return d.dot(P * d);
  }
  Scalar constraint(const VectorX<Scalar> &theta) const {
    return (theta - c).squaredNorm() - r * r;
  }
  Scalar lagrangian(const VectorX<Scalar> &theta, Scalar lambda) const {
    return neg_reward(theta) + lambda * constraint(theta);
  }
  /// True when the unconstrained optimum a violates the constraint.
  bool active() const { return constraint(a) > 0; }

  void validate() const {
    const auto n = a.size();
    if (n < 1 || P.rows() != n || P.cols() != n || c.size() != n)
      throw ConfigError("quadratic problem dimensions are inconsistent");
    if (!(r > 0))
      throw ConfigError("constraint radius must be > 0");
    if (!(P - P.transpose()).isZero(Scalar(1e-12) * (Scalar(1) + P.norm())))
      throw ConfigError("P must be symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(P, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > Scalar(1e-6)))
      throw ConfigError("P must be positive definite (min eigenvalue > 1e-6)");
  }
};

/**
 * Seeded random instance. P = A^T A / d + mu I with mu in [0.1, 1]; a and c
 * are at least 0.5 apart. Active instances put r in [0.2, 0.9] |a - c|,
 * inactive ones in [|a - c| / 0.9, |a - c| / 0.2].
 */
template <typename Scalar>
QuadraticProblem<Scalar> random_quadratic(int dim, bool active, std::uint64_t seed) {
  if (dim < 1)
    throw ConfigError("problem dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
    MatrixX<Scalar> m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i)
        m(i, j) = Scalar(gauss(rng));
    return m;
  };
  QuadraticProblem<Scalar> prob;
  const MatrixX<Scalar> A = draw(dim, dim);
  const Scalar mu = Scalar(0.1 + 0.9 * unit(rng));
  prob.P = A.transpose() * A / Scalar(dim);
  prob.P.diagonal().array() += mu;
  prob.P = Scalar(0.5) * (prob.P + prob.P.transpose()).eval();
  prob.c = draw(dim, 1);
  VectorX<Scalar> dir = draw(dim, 1);
  while (dir.norm() < Scalar(1e-3))
    dir = draw(dim, 1);
  const Scalar dist = Scalar(0.5 + 2.5 * unit(rng));
  prob.a = prob.c + dist * dir / dir.norm();
  const Scalar frac = Scalar(0.2 + 0.7 * unit(rng));
  prob.r = active ? frac * dist : dist / frac;
  return prob;
}

/// Unique minimizer of L(., lambda): (P + lambda I)^{-1} (P a + lambda c).
template <typename Scalar>
VectorX<Scalar> theta_of_lambda(const QuadraticProblem<Scalar> &prob, Scalar lambda) {
  if (!(lambda >= 0))
    throw ConfigError("lambda must be >= 0");
  MatrixX<Scalar> H = prob.P;
  H.diagonal().array() += lambda;
  return H.llt().solve(prob.P * prob.a + lambda * prob.c);
}

/// |grad_theta L(theta(lambda), lambda)|.
template <typename Scalar>
Scalar stationarity_residual(const QuadraticProblem<Scalar> &prob, Scalar lambda) {
  const VectorX<Scalar> theta = theta_of_lambda(prob, lambda);
  const VectorX<Scalar> g =
      Scalar(2) * prob.P * (theta - prob.a) + Scalar(2) * lambda * (theta - prob.c);
  return g.norm();
}

/// Gamma(lambda) = min_theta L(theta, lambda).
template <typename Scalar>
Scalar dual_value(const QuadraticProblem<Scalar> &prob, Scalar lambda) {
  return prob.lagrangian(theta_of_lambda(prob, lambda), lambda);
}

/// Gamma'(lambda) = J_c(theta(lambda)).
template <typename Scalar>
Scalar dual_slope(const QuadraticProblem<Scalar> &prob, Scalar lambda) {
  return prob.constraint(theta_of_lambda(prob, lambda));
}

/// d/dlambda J_c(theta(lambda)) = -grad J_c^T (hess L)^{-1} grad J_c.
template <typename Scalar>
Scalar constraint_derivative(const QuadraticProblem<Scalar> &prob, Scalar lambda) {
  const VectorX<Scalar> theta = theta_of_lambda(prob, lambda);
  const VectorX<Scalar> g = Scalar(2) * (theta - prob.c);
  MatrixX<Scalar> H = Scalar(2) * prob.P;
  H.diagonal().array() += Scalar(2) * lambda;
  return -g.dot(H.llt().solve(g));
}

template <typename Scalar>
struct DualCurve {
  VectorX<Scalar> lambda;
  VectorX<Scalar> value; // Gamma
  VectorX<Scalar> slope; // Gamma' = J_c(theta(lambda))
};

template <typename Scalar>
DualCurve<Scalar> dual_curve(const QuadraticProblem<Scalar> &prob,
                             const VectorX<Scalar> &grid) {
  if (grid.size() < 2)
    throw ConfigError("lambda grid needs at least 2 points");
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(double(grid(i))) || grid(i) < 0)
      throw ConfigError("lambda grid must be finite and >= 0");
    if (i > 0 && !(grid(i) > grid(i - 1)))
      throw ConfigError("lambda grid must be strictly ascending");
  }
  DualCurve<Scalar> curve;
  curve.lambda = grid;
  curve.value.resize(grid.size());
  curve.slope.resize(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const VectorX<Scalar> theta = theta_of_lambda(prob, grid(i));
    curve.value(i) = prob.lagrangian(theta, grid(i));
    curve.slope(i) = prob.constraint(theta);
  }
  return curve;
}

template <typename Scalar>
VectorX<Scalar> uniform_grid(Scalar lo, Scalar hi, int points) {
  if (points < 2 || !(hi > lo))
    throw ConfigError("grid needs >= 2 points and hi > lo");
  return VectorX<Scalar>::LinSpaced(points, lo, hi);
}

struct MonotonicityReport {
  bool passed = false;
  double max_difference = 0;   // largest J_c(theta(l_{j+1})) - J_c(theta(l_j)); < 0 required
  double max_derivative = 0;   // largest analytic derivative on the grid; < 0 required
  double max_fd_rel_error = 0; // analytic derivative vs central difference
};

template <typename Scalar>
MonotonicityReport check_monotonicity(const QuadraticProblem<Scalar> &prob,
                                      const VectorX<Scalar> &grid) {
  const DualCurve<Scalar> curve = dual_curve(prob, grid);
  MonotonicityReport rep;
  rep.max_difference = -std::numeric_limits<double>::infinity();
  rep.max_derivative = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j + 1 < grid.size(); ++j)
    rep.max_difference =
        std::max(rep.max_difference, double(curve.slope(j + 1) - curve.slope(j)));
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const Scalar lam = grid(j);
    const Scalar d = constraint_derivative(prob, lam);
    rep.max_derivative = std::max(rep.max_derivative, double(d));
    const Scalar h = Scalar(1e-4) * (Scalar(1) + lam);
    const Scalar lo = std::max(Scalar(0), lam - h);
    const Scalar hi = lam + h;
    const Scalar fd = (dual_slope(prob, hi) - dual_slope(prob, lo)) / (hi - lo);
    const Scalar ref = constraint_derivative(prob, lo + (hi - lo) / 2);
    const double denom = std::max({std::abs(double(ref)), std::abs(double(fd)), 1e-300});
    rep.max_fd_rel_error =
        std::max(rep.max_fd_rel_error, std::abs(double(ref - fd)) / denom);
  }
  rep.passed = rep.max_difference < 0 && rep.max_derivative < 0;
  return rep;
}

struct LemmaReport {
  bool passed = false;
  double argmax_value = 0; // lambda maximizing Gamma on the grid
  double argmin_slope = 0; // lambda minimizing |Gamma'| on the grid
  double gap = 0;
  double spacing = 0; // largest adjacent grid spacing
};

template <typename Scalar>
LemmaReport check_lemma(const QuadraticProblem<Scalar> &prob, const VectorX<Scalar> &grid) {
  const DualCurve<Scalar> curve = dual_curve(prob, grid);
  Eigen::Index imax = 0, imin = 0;
  curve.value.maxCoeff(&imax);
  curve.slope.cwiseAbs().minCoeff(&imin);
  LemmaReport rep;
  rep.argmax_value = double(grid(imax));
  rep.argmin_slope = double(grid(imin));
  rep.gap = std::abs(rep.argmax_value - rep.argmin_slope);
  for (Eigen::Index j = 0; j + 1 < grid.size(); ++j)
    rep.spacing = std::max(rep.spacing, double(grid(j + 1) - grid(j)));
  rep.passed = rep.gap <= rep.spacing * (1 + 1e-12);
  return rep;
}

template <typename Scalar>
struct BisectionResult {
  Scalar lambda = 0;
  Scalar slope = 0; // Gamma'(lambda)
  int iterations = 0;
};

/**
 * Minimizes |J_c(theta(lambda))| over lambda >= 0. Returns 0 when
 * J_c(a) <= 0; otherwise brackets the root by doubling and bisects until
 * |Gamma'| <= 1e-10, the bracket is <= 1e-12 wide, or 200 iterations.
 */
template <typename Scalar>
BisectionResult<Scalar> solve_multiplier(const QuadraticProblem<Scalar> &prob) {
  BisectionResult<Scalar> out;
  out.slope = dual_slope(prob, Scalar(0));
  if (out.slope <= 0)
    return out;
  Scalar lo = 0, hi = 1;
  Scalar s_hi = dual_slope(prob, hi);
  while (s_hi > 0) {
    lo = hi;
    hi *= 2;
    s_hi = dual_slope(prob, hi);
    if (hi > Scalar(1e15))
      throw ConfigError("multiplier bracket did not close");
  }
  out.lambda = hi;
  out.slope = s_hi;
  for (out.iterations = 0; out.iterations < 200; ++out.iterations) {
    if (std::abs(out.slope) <= Scalar(1e-10) || hi - lo <= Scalar(1e-12))
      break;
    const Scalar mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi)
      break;
    const Scalar s = dual_slope(prob, mid);
    if (s > 0)
      lo = mid;
    else
      hi = mid;
    out.lambda = mid;
    out.slope = s;
  }
  return out;
}

template <typename Scalar>
struct PrimalResult {
  VectorX<Scalar> theta;
  int iterations = 0;
  bool converged = false;
  Scalar step_norm = 0; // last |theta_{k+1} - theta_k|
};

/// Projects theta onto the ball |theta - c| <= r.
template <typename Scalar>
VectorX<Scalar> project_ball(const VectorX<Scalar> &theta, const VectorX<Scalar> &c,
                             Scalar r) {
  const VectorX<Scalar> d = theta - c;
  const Scalar n = d.norm();
  return n <= r ? theta : VectorX<Scalar>(c + d * (r / n));
}

/**
 * Projected gradient on min (theta-a)^T P (theta-a) s.t. |theta - c| <= r,
 * step 1 / (2 lambda_max(P)), stopped when |theta_{k+1} - theta_k| <= tol.
 */
template <typename Scalar>
PrimalResult<Scalar> solve_primal(const QuadraticProblem<Scalar> &prob,
                                  Scalar tol = Scalar(1e-8),
                                  int max_iterations = 10000000) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(prob.P, Eigen::EigenvaluesOnly);
  const Scalar step = Scalar(1) / (Scalar(2) * eig.eigenvalues().maxCoeff());
  PrimalResult<Scalar> out;
  out.theta = prob.c;
  for (out.iterations = 1; out.iterations <= max_iterations; ++out.iterations) {
    const VectorX<Scalar> grad = Scalar(2) * prob.P * (out.theta - prob.a);
    VectorX<Scalar> next = project_ball<Scalar>(out.theta - step * grad, prob.c, prob.r);
    out.step_norm = (next - out.theta).norm();
    out.theta.swap(next);
    if (out.step_norm <= tol) {
      out.converged = true;
      break;
    }
  }
  out.iterations = std::min(out.iterations, max_iterations);
  return out;
}

struct EquivalenceReport {
  bool passed = false;
  bool primal_converged = false;
  int primal_iterations = 0;
  double primal_step = 0;
  double lambda_star = 0;
  int bisection_iterations = 0;
  double slope_at_star = 0;
  double theta_error = 0; // |theta_primal - theta(lambda*)| / (1 + |theta_primal|)
};

template <typename Scalar>
EquivalenceReport check_equivalence(const QuadraticProblem<Scalar> &prob) {
  EquivalenceReport rep;
  const PrimalResult<Scalar> primal = solve_primal(prob);
  const BisectionResult<Scalar> dual = solve_multiplier(prob);
  const VectorX<Scalar> theta_dual = theta_of_lambda(prob, dual.lambda);
  rep.primal_converged = primal.converged;
  rep.primal_iterations = primal.iterations;
  rep.primal_step = double(primal.step_norm);
  rep.lambda_star = double(dual.lambda);
  rep.bisection_iterations = dual.iterations;
  rep.slope_at_star = double(dual.slope);
  rep.theta_error = double((primal.theta - theta_dual).norm() /
                           (Scalar(1) + primal.theta.norm()));
  rep.passed = rep.primal_converged && rep.theta_error <= 1e-5;
  return rep;
}

/// Grid [0, hi] with hi twice the multiplier bracket (at least 1).
template <typename Scalar>
VectorX<Scalar> default_lambda_grid(const QuadraticProblem<Scalar> &prob, int points) {
  const Scalar star = solve_multiplier(prob).lambda;
  return uniform_grid<Scalar>(Scalar(0), std::max(Scalar(1), Scalar(2) * star), points);
}

struct InstanceReport {
  int index = 0;
  int dim = 0;
  bool active = false;
  std::uint64_t seed = 0;
  MonotonicityReport monotonicity;
  LemmaReport lemma;
  EquivalenceReport equivalence;

  bool passed() const {
    return monotonicity.passed && lemma.passed && equivalence.passed;
  }
};

struct SuiteReport {
  std::vector<InstanceReport> instances;

  int monotonicity_passes() const;
  int lemma_passes() const;
  int equivalence_passes() const;
  bool passed() const;
};

/// Dimension cycle of the suite: 1, 2, 5, 20.
int suite_dimension(int index);
/// Seed of instance `index`; activity alternates, starting active.
std::uint64_t suite_seed(std::uint64_t seed, int index);
QuadraticProblem<double> suite_instance(std::uint64_t seed, int index);

/// Runs all three checks on n_instances seeded problems (in parallel).
SuiteReport run_theory_suite(std::uint64_t seed, int n_instances);

/// Fixed-width pass/fail table; identical for identical inputs.
std::string format_suite(const SuiteReport &report);

} // namespace plo

#endif // PLO_THEORY_HPP
