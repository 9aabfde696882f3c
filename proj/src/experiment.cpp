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

#include "plo/experiment.hpp"
#include "plo/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>

namespace plo {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream &out, const fs::path &path) {
  out.flush();
  if (!out)
    throw IoError("failed writing " + path.string());
}

std::string padded(std::uint64_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06llu", static_cast<unsigned long long>(iteration));
  return buf;
}

ExperimentConfig snapshot(const ExperimentConfig &cfg, std::uint64_t seed) {
  ExperimentConfig s = cfg;
  s.seeds = {seed};
  return s;
}

void write_compare_csv(const fs::path &path, const std::vector<CompareRow> &rows) {
  auto out = open_out(path);
  out << "iter,seed,controller,proportion,mean_reward\n";
  for (const auto &r : rows)
    out << r.iteration << ',' << r.seed << ',' << to_string(r.controller) << ','
        << format_double(r.proportion) << ',' << format_double(r.mean_reward) << '\n';
  finish(out, path);
}

} // namespace

fs::path make_run_dir(const fs::path &base, const std::string &name) {
  if (name.empty())
    throw ConfigError("run name must not be empty");
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec)
    throw IoError("cannot create " + base.string() + ": " + ec.message());
  for (int i = 0;; ++i) {
    const fs::path dir = base / (i == 0 ? name : name + "_" + std::to_string(i));
    if (fs::create_directory(dir, ec))
      return dir;
    if (ec)
      throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
}

EvalGrid eval_grid(const ExperimentConfig &cfg) {
  EvalGrid grid = EvalGrid::for_env(cfg.env);
  if (cfg.eval.first_points)
    grid.first.points = cfg.eval.first_points;
  if (cfg.eval.second_points)
    grid.second.points = cfg.eval.second_points;
  grid.validate(cfg.env);
  return grid;
}

std::vector<bool> theoretical_mask(const ExperimentConfig &cfg) {
  return max_feasible_region(cfg.env, eval_grid(cfg), cfg.eval.steps, cfg.eval.threshold);
}

TrainRun run_train(const ExperimentConfig &cfg, std::uint64_t seed, const fs::path &dir,
                   std::ostream *log) {
  cfg.validate();
  save_config(dir / "config.txt", snapshot(cfg, seed));
  const PolicySpec spec = cfg.policy_for(seed);
  const TrainConfig tc = cfg.train_for(seed);
  const std::string tag =
      std::string(to_string(tc.controller.kind)) + " seed " + std::to_string(seed);

  TrainRun run;
  run.dir = dir;
  auto on_row = [&](const TrainRow &row) {
    run.record.push_back(row);
    if (log && (row.iter + 1) % tc.checkpoint_period == 0)
      *log << "[" << tag << "] iter " << row.iter + 1 << " J=" << row.J
           << " Jc=" << row.Jc << " lambda=" << row.lambda << std::endl;
  };
  try {
    TrainResult result = train(spec, init_params(spec), cfg.env, tc, dir, on_row);
    run.theta = std::move(result.theta);
    run.checkpoints = std::move(result.checkpoints);
  } catch (const DivergedRollout &) {
    write_train_csv(dir / "train.csv", run.record);
    throw;
  }
  write_train_csv(dir / "train.csv", run.record);
  return run;
}

std::vector<fs::path> list_checkpoints(const fs::path &path) {
  std::error_code ec;
  if (fs::is_regular_file(path, ec))
    return {path};
  if (!fs::is_directory(path, ec))
    throw IoError("no such checkpoint file or directory: " + path.string());
  static const std::regex pattern("checkpoint_[0-9]{6,}\\.plo");
  std::vector<fs::path> out;
  for (const auto &entry : fs::directory_iterator(path))
    if (entry.is_regular_file() &&
        std::regex_match(entry.path().filename().string(), pattern))
      out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  if (out.empty())
    throw IoError("no checkpoint_<iter>.plo files in " + path.string());
  return out;
}

std::vector<CheckpointEval> run_eval(const ExperimentConfig &cfg,
                                     const std::vector<fs::path> &checkpoints,
                                     const fs::path &dir, const std::vector<bool> &mask,
                                     std::ostream *log) {
  cfg.validate();
  const EvalGrid grid = eval_grid(cfg);
  std::vector<CheckpointEval> evals;
  for (const auto &path : checkpoints) {
    Checkpoint ckpt = load_checkpoint(path);
    if (!(ckpt.spec == cfg.policy_for(ckpt.spec.init_seed)))
      throw CheckpointError(path.string() +
                            ": policy architecture does not match the configuration");
    CheckpointEval ev;
    ev.iteration = ckpt.iteration;
    ev.report = evaluate(ckpt.spec, ckpt.theta, cfg.env, grid, cfg.eval.steps,
                         cfg.eval.threshold);
    ev.proportion = proportion(ev.report, mask);
    ev.mean_reward = feasible_mean_reward(ev.report);
    write_region_csv(dir / ("region_" + padded(ev.iteration) + ".csv"), ev.report);
    if (log)
      *log << "[eval] " << path.filename().string() << " proportion=" << ev.proportion
           << " mean_reward=" << ev.mean_reward << std::endl;
    evals.push_back(std::move(ev));
  }
  const fs::path summary = dir / "summary.csv";
  auto out = open_out(summary);
  out << "iter,proportion\n";
  for (const auto &ev : evals)
    out << ev.iteration << ',' << format_double(ev.proportion) << '\n';
  finish(out, summary);
  return evals;
}

CompareResult run_compare(const ExperimentConfig &cfg, const fs::path &dir,
                          std::ostream *log) {
  cfg.validate();
  save_config(dir / "config.txt", cfg);
  const std::vector<bool> mask = theoretical_mask(cfg);
  CompareResult result;
  for (const std::uint64_t seed : cfg.seeds) {
    const RegionReport *finals[2] = {nullptr, nullptr};
    std::vector<CheckpointEval> kept[2];
    const ControllerKind kinds[2] = {ControllerKind::Pid, ControllerKind::Plo};
    for (int c = 0; c < 2; ++c) {
      ExperimentConfig sub = cfg;
      sub.train.controller.kind = kinds[c];
      const fs::path subdir =
          dir / (std::string(to_string(kinds[c])) + "_seed" + std::to_string(seed));
      try {
        fs::create_directories(subdir);
        const TrainRun run = run_train(sub, seed, subdir, log);
        kept[c] = run_eval(sub, run.checkpoints, subdir, mask, log);
        for (const auto &ev : kept[c])
          result.rows.push_back({ev.iteration, seed, kinds[c], ev.proportion, ev.mean_reward});
        if (!kept[c].empty())
          finals[c] = &kept[c].back().report;
      } catch (const std::exception &e) {
        result.failures.push_back(subdir.string() + ": " + e.what());
        if (log)
          *log << "[compare] " << subdir.filename().string() << " failed: " << e.what()
               << std::endl;
      }
      write_compare_csv(dir / "compare.csv", result.rows);
    }
    if (finals[0] && finals[1]) {
      SeedDelta d;
      d.seed = seed;
      d.pid_proportion = kept[0].back().proportion;
      d.plo_proportion = kept[1].back().proportion;
      d.pid_shared_reward = shared_feasible_reward(*finals[0], *finals[1]);
      d.plo_shared_reward = shared_feasible_reward(*finals[1], *finals[0]);
      for (std::size_t i = 0; i < finals[0]->labels.size(); ++i)
        d.shared_cells += finals[0]->labels[i] == CellLabel::Feasible &&
                          finals[1]->labels[i] == CellLabel::Feasible;
      result.deltas.push_back(d);
    }
  }
  const fs::path delta_path = dir / "delta.csv";
  auto out = open_out(delta_path);
  out << "seed,pid_proportion,plo_proportion,delta,pid_shared_reward,plo_shared_reward,"
         "shared_cells\n";
  for (const auto &d : result.deltas)
    out << d.seed << ',' << format_double(d.pid_proportion) << ','
        << format_double(d.plo_proportion) << ',' << format_double(d.delta()) << ','
        << format_double(d.pid_shared_reward) << ',' << format_double(d.plo_shared_reward)
        << ',' << d.shared_cells << '\n';
  finish(out, delta_path);
  return result;
}

std::vector<ControllerConfig> synthetic_controllers(const ExperimentConfig &cfg) {
  ControllerConfig base = cfg.train_for(0).controller;
  std::vector<ControllerConfig> out;
  for (ControllerKind kind :
       {ControllerKind::DualAscent, ControllerKind::Pid, ControllerKind::Plo}) {
    base.kind = kind;
    out.push_back(base);
  }
  return out;
}

std::vector<SyntheticRun> run_synthetic(const ExperimentConfig &cfg, std::uint64_t seed,
                                        const fs::path &dir, std::ostream *log) {
  cfg.validate();
  save_config(dir / "config.txt", snapshot(cfg, seed));
  const auto controllers = synthetic_controllers(cfg);
  const auto runs =
      run_synthetic_study(seed, cfg.synthetic_instances, controllers, cfg.synthetic_steps);
  fs::create_directories(dir / "traces");
  const fs::path summary = dir / "synthetic_summary.csv";
  auto out = open_out(summary);
  out << "instance,dim,active,controller,lambda_star,steps_to_1e-3,final_gap\n";
  for (const auto &run : runs) {
    for (std::size_t c = 0; c < run.traces.size(); ++c) {
      const auto &trace = run.traces[c];
      const std::string name(to_string(run.controllers[c].kind));
      write_trace_csv(dir / "traces" /
                          ("instance_" + std::to_string(run.instance) + "_" + name + ".csv"),
                      trace);
      out << run.instance << ',' << run.dim << ',' << (run.active ? 1 : 0) << ',' << name
          << ',' << format_double(trace.lambda_star) << ',' << trace.steps_to(1e-3) << ','
          << format_double(trace.gap(trace.gap.size() - 1)) << '\n';
    }
  }
  finish(out, summary);
  if (log)
    *log << "[synthetic] " << runs.size() << " instances x " << controllers.size()
         << " controllers written to " << dir.string() << std::endl;
  return runs;
}

} // namespace plo
