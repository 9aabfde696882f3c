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

#include "plo/checkpoint.hpp"
#include "plo/cli.hpp"
#include "plo/config.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace plo;
using plo::test::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "plo");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

bool contains(const std::string &s, const std::string &part) {
  return s.find(part) != std::string::npos;
}

// Small enough to train in well under a second.
const char *kSmall = "policy.hidden_width = 8\n"
                     "train.batch_size = 8\n"
                     "rollout.horizon = 20\n";

fs::path small_config(const TempDir &dir, const std::string &extra,
                      int points = 11) {
  const fs::path path = dir.path() / "config.txt";
  const std::string grid = "eval.first_points = " + std::to_string(points) +
                           "\neval.second_points = " + std::to_string(points) + "\n";
  plo::test::write_file(path, std::string(kSmall) + grid + "output.dir = " +
                                  (dir.path() / "runs").string() + "\n" + extra);
  return path;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("argument and config errors exit with 2") {
  CHECK(run({}).code == kExitInvalidConfig);
  CHECK(run({"fly"}).code == kExitInvalidConfig);
  CHECK(run({"train", "--bogus"}).code == kExitInvalidConfig);
  CHECK(run({"eval"}).code == kExitInvalidConfig);
  const Result missing = run({"train", "--config", "/nonexistent/plo.cfg"});
  CHECK(missing.code == kExitInvalidConfig);
  CHECK(contains(missing.err, "/nonexistent/plo.cfg"));

  TempDir dir("cli_badcfg");
  plo::test::write_file(dir.path() / "bad.txt", "train.iterations = -3\n");
  const Result bad = run({"train", "--config", (dir.path() / "bad.txt").string()});
  CHECK(bad.code == kExitInvalidConfig);
  CHECK(contains(bad.err, "train.iterations"));
}

TEST_CASE("help exits cleanly") {
  const Result r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "train"));
  CHECK(contains(r.out, "compare"));
}

TEST_CASE("train writes records, checkpoints and the config snapshot") {
  TempDir dir("cli_train");
  const fs::path cfg = small_config(dir, "train.iterations = 10\n");
  const Result r = run({"train", "--config", cfg.string(), "--seed", "3"});
  REQUIRE(r.code == kExitOk);
  const fs::path run_dir = dir.path() / "runs" / "train_double_integrator_plo_seed3";
  CHECK(contains(r.out, run_dir.string()));
  CHECK(plo::test::count_lines(plo::test::read_file(run_dir / "train.csv")) == 11);
  CHECK(fs::exists(run_dir / "checkpoint_000010.plo"));
  const Checkpoint ck = load_checkpoint(run_dir / "checkpoint_000010.plo");
  CHECK(ck.iteration == 10);
  CHECK(ck.spec.init_seed == 3);
  const ExperimentConfig snap = load_config(run_dir / "config.txt");
  CHECK(snap.seeds == std::vector<std::uint64_t>{3});
  CHECK(snap.train.iterations == 10);
}

TEST_CASE("reruns never overwrite and reproduce every byte") {
  TempDir dir("cli_rerun");
  const fs::path cfg =
      small_config(dir, "train.iterations = 12\ntrain.checkpoint_period = 4\n"
                        "output.run_id = same\ncontroller.kind = pid\n");
  REQUIRE(run({"train", "--config", cfg.string()}).code == kExitOk);
  REQUIRE(run({"train", "--config", cfg.string()}).code == kExitOk);
  const fs::path a = dir.path() / "runs" / "same";
  const fs::path b = dir.path() / "runs" / "same_1";
  REQUIRE(fs::is_directory(b));
  for (const char *name : {"train.csv", "config.txt", "checkpoint_000004.plo",
                           "checkpoint_000008.plo", "checkpoint_000012.plo"})
    CHECK(plo::test::read_file(a / name) == plo::test::read_file(b / name));
}

TEST_CASE("seed lists create one run per seed") {
  TempDir dir("cli_seeds");
  const fs::path cfg = small_config(dir, "train.iterations = 2\nseeds = 1,2\n");
  REQUIRE(run({"train", "--config", cfg.string()}).code == kExitOk);
  CHECK(fs::is_directory(dir.path() / "runs" / "train_double_integrator_plo_seed1"));
  CHECK(fs::is_directory(dir.path() / "runs" / "train_double_integrator_plo_seed2"));
}

TEST_CASE("a diverging run exits with 1 and keeps its partial output") {
  TempDir dir("cli_diverge");
  const fs::path cfg = small_config(
      dir, "policy.hidden_layers = 0\nenv.u_max = 1e6\ntrain.learning_rate = 1e308\n"
           "train.iterations = 10\noutput.run_id = boom\n");
  const Result r = run({"train", "--config", cfg.string()});
  CHECK(r.code == kExitFailure);
  CHECK(contains(r.err, "step"));
  const fs::path run_dir = dir.path() / "runs" / "boom";
  CHECK(fs::exists(run_dir / "config.txt"));
  CHECK(fs::exists(run_dir / "train.csv"));
}

TEST_CASE("evaluating a zero policy") {
  TempDir dir("cli_eval");
  const fs::path cfg_path =
      small_config(dir, "", 5);
  const ExperimentConfig cfg = load_config(cfg_path);
  Checkpoint ck;
  ck.spec = cfg.policy_for(0);
  ck.theta = ParamVector::Zero(ck.spec.param_count());
  const fs::path ckpt = dir.path() / "zero.plo";
  save_checkpoint(ckpt, ck);

  const Result r = run({"eval", "--config", cfg_path.string(), "--checkpoint", ckpt.string()});
  REQUIRE(r.code == kExitOk);
  const fs::path out = dir.path() / "runs" / "eval_zero";
  const std::string region = plo::test::read_file(out / "region_000000.csv");
  CHECK(plo::test::count_lines(region) == 26);
  // Standing still is safe; any velocity leaves the box within the horizon.
  CHECK(contains(region, "\n3,0,feasible,0,"));
  CHECK(contains(region, "\n3,1,endless_infeasible,"));
  CHECK(contains(region, "\n3,-2,endless_infeasible,"));
  const std::string summary = plo::test::read_file(out / "summary.csv");
  CHECK(summary.rfind("iter,proportion\n0,", 0) == 0);
  CHECK(load_config(out / "config.txt").eval.steps == 200);
}

TEST_CASE("eval falls back to the run's config and accepts a directory") {
  TempDir dir("cli_evaldir");
  const fs::path cfg = small_config(
      dir, "train.iterations = 4\ntrain.checkpoint_period = 2\noutput.run_id = r\n");
  REQUIRE(run({"train", "--config", cfg.string()}).code == kExitOk);
  const fs::path run_dir = dir.path() / "runs" / "r";
  const Result r = run({"eval", "--checkpoint", run_dir.string(), "--out",
                        (dir.path() / "evals").string()});
  REQUIRE(r.code == kExitOk);
  const fs::path out = dir.path() / "evals" / "eval_r";
  CHECK(fs::exists(out / "region_000002.csv"));
  CHECK(fs::exists(out / "region_000004.csv"));
  CHECK(plo::test::count_lines(plo::test::read_file(out / "summary.csv")) == 3);
  CHECK(plo::test::count_lines(plo::test::read_file(out / "region_000004.csv")) == 122);
}

TEST_CASE("bad checkpoints exit with 3") {
  TempDir dir("cli_badckpt");
  const fs::path cfg_path = small_config(dir, "");
  plo::test::write_file(dir.path() / "junk.plo", "definitely not a checkpoint");
  const Result junk = run({"eval", "--config", cfg_path.string(), "--checkpoint",
                           (dir.path() / "junk.plo").string()});
  CHECK(junk.code == kExitCheckpoint);
  CHECK(contains(junk.err, "junk.plo"));

  Checkpoint ck;
  ck.spec = load_config(cfg_path).policy_for(0);
  ck.spec.hidden_width = 16;
  ck.theta = ParamVector::Zero(ck.spec.param_count());
  save_checkpoint(dir.path() / "wide.plo", ck);
  const Result wide = run({"eval", "--config", cfg_path.string(), "--checkpoint",
                           (dir.path() / "wide.plo").string()});
  CHECK(wide.code == kExitCheckpoint);
  CHECK(contains(wide.err, "architecture"));

  const Result missing = run({"eval", "--config", cfg_path.string(), "--checkpoint",
                              (dir.path() / "none.plo").string()});
  CHECK(missing.code == kExitFailure);
  CHECK(contains(missing.err, "none.plo"));
}

TEST_CASE("verify") {
  const Result a = run({"verify", "--instances", "20"});
  CHECK(a.code == kExitOk);
  CHECK(contains(a.out, "monotonicity 20/20"));
  CHECK(contains(a.out, "result PASS"));
  CHECK(run({"verify", "--instances", "20"}).out == a.out);
  CHECK(run({"verify", "--instances", "20", "--seed", "5"}).out != a.out);
  const Result none = run({"verify", "--instances", "0"});
  CHECK(none.code == kExitInvalidConfig);
  CHECK(contains(none.err, "verify.n_instances"));
}

TEST_CASE("verify with the default hundred instances") {
  const Result r = run({"verify"});
  CHECK(r.code == kExitOk);
  CHECK(contains(r.out, "equivalence 100/100"));
}

TEST_CASE("compare trains both controllers and writes the deltas") {
  TempDir dir("cli_compare");
  const fs::path cfg =
      small_config(dir, "train.iterations = 40\ntrain.checkpoint_period = 20\nseeds = 1\n");
  const Result r = run({"compare", "--config", cfg.string()});
  REQUIRE(r.code == kExitOk);
  const fs::path out = dir.path() / "runs" / "compare_double_integrator";
  const std::string rows = plo::test::read_file(out / "compare.csv");
  CHECK(rows.rfind("iter,seed,controller,proportion,mean_reward\n", 0) == 0);
  CHECK(plo::test::count_lines(rows) == 5);
  CHECK(contains(rows, "\n20,1,pid,"));
  CHECK(contains(rows, "\n40,1,plo,"));
  const std::string delta = plo::test::read_file(out / "delta.csv");
  CHECK(plo::test::count_lines(delta) == 2);
  CHECK(contains(delta, "\n1,"));
  CHECK(fs::exists(out / "pid_seed1" / "train.csv"));
  CHECK(fs::exists(out / "plo_seed1" / "region_000040.csv"));
  CHECK(contains(r.out, "seed 1: pid "));
}

TEST_CASE("synthetic study output") {
  TempDir dir("cli_synth");
  const fs::path cfg = small_config(dir, "synthetic.instances = 3\nsynthetic.steps = 20\n");
  const Result r = run({"compare", "--synthetic", "--config", cfg.string(), "--seed", "4"});
  REQUIRE(r.code == kExitOk);
  const fs::path out = dir.path() / "runs" / "synthetic_seed4";
  const std::string summary = plo::test::read_file(out / "synthetic_summary.csv");
  CHECK(plo::test::count_lines(summary) == 1 + 3 * 3);
  for (const char *c : {"dual", "pid", "plo"}) {
    const fs::path trace = out / "traces" / (std::string("instance_2_") + c + ".csv");
    REQUIRE(fs::exists(trace));
    CHECK(plo::test::count_lines(plo::test::read_file(trace)) == 21);
  }
}

}
