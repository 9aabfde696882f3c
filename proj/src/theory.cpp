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

#include "plo/theory.hpp"
#include "plo/parallel.hpp"

#include <cstdio>

namespace plo {

namespace {

constexpr int kDims[] = {1, 2, 5, 20};
constexpr int kGridPoints = 201;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

int SuiteReport::monotonicity_passes() const {
  int n = 0;
  for (const auto &r : instances)
    n += r.monotonicity.passed;
  return n;
}

int SuiteReport::lemma_passes() const {
  int n = 0;
  for (const auto &r : instances)
    n += r.lemma.passed;
  return n;
}

int SuiteReport::equivalence_passes() const {
  int n = 0;
  for (const auto &r : instances)
    n += r.equivalence.passed;
  return n;
}

bool SuiteReport::passed() const {
  const int n = static_cast<int>(instances.size());
  return n > 0 && monotonicity_passes() == n && lemma_passes() == n &&
         equivalence_passes() == n;
}

int suite_dimension(int index) { return kDims[index % 4]; }

std::uint64_t suite_seed(std::uint64_t seed, int index) {
  return mix(seed ^ mix(static_cast<std::uint64_t>(index) + 1));
}

QuadraticProblem<double> suite_instance(std::uint64_t seed, int index) {
  // Dimension cycles every instance, activity every four.
  const bool active = (index / 4) % 2 == 0;
  return random_quadratic<double>(suite_dimension(index), active,
                                  suite_seed(seed, index));
}

SuiteReport run_theory_suite(std::uint64_t seed, int n_instances) {
  if (n_instances < 1)
    throw ConfigError("verify.n_instances must be >= 1");
  SuiteReport report;
  report.instances.resize(n_instances);
  parallel_for(n_instances, [&](int i) {
    const QuadraticProblem<double> prob = suite_instance(seed, i);
    prob.validate();
    InstanceReport &r = report.instances[i];
    r.index = i;
    r.dim = prob.dim();
    r.active = prob.active();
    r.seed = suite_seed(seed, i);
    r.monotonicity =
        check_monotonicity(prob, uniform_grid(0.0, 10.0, 50));
    r.lemma = check_lemma(prob, default_lambda_grid(prob, kGridPoints));
    r.equivalence = check_equivalence(prob);
  });
  return report;
}

std::string format_suite(const SuiteReport &report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%5s %4s %6s %6s %6s %6s %12s %12s %12s\n",
                "inst", "dim", "active", "mono", "lemma", "equiv", "lambda*",
                "lemma_gap", "theta_err");
  out += line;
  auto mark = [](bool ok) { return ok ? "pass" : "FAIL"; };
  for (const auto &r : report.instances) {
    std::snprintf(line, sizeof(line),
                  "%5d %4d %6s %6s %6s %6s %12.5e %12.5e %12.5e\n", r.index, r.dim,
                  r.active ? "yes" : "no", mark(r.monotonicity.passed),
                  mark(r.lemma.passed), mark(r.equivalence.passed),
                  r.equivalence.lambda_star, r.lemma.gap, r.equivalence.theta_error);
    out += line;
  }
  const int n = static_cast<int>(report.instances.size());
  std::snprintf(line, sizeof(line),
                "monotonicity %d/%d\nlemma %d/%d\nequivalence %d/%d\nresult %s\n",
                report.monotonicity_passes(), n, report.lemma_passes(), n,
                report.equivalence_passes(), n, report.passed() ? "PASS" : "FAIL");
  out += line;
  return out;
}

} // namespace plo
