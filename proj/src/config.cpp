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

#include "plo/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace plo {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("invalid value '" + std::string(v) + "' for key " +
                      std::string(key));
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  const double d = parse_number<double>(key, v);
  if (!std::isfinite(d))
    throw ConfigError("non-finite value for key " + std::string(key));
  return d;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1")
    return true;
  if (v == "false" || v == "0")
    return false;
  throw ConfigError("invalid boolean '" + std::string(v) + "' for key " +
                    std::string(key));
}

std::vector<std::uint64_t> parse_seeds(std::string_view key, std::string_view v) {
  std::vector<std::uint64_t> seeds;
  while (!v.empty()) {
    const auto comma = v.find(',');
    seeds.push_back(parse_number<std::uint64_t>(key, trim(v.substr(0, comma))));
    if (comma == std::string_view::npos)
      break;
    v.remove_prefix(comma + 1);
  }
  if (seeds.empty())
    throw ConfigError("key seeds needs at least one seed");
  return seeds;
}

struct Field {
  const char *key;
  std::function<std::string(const ExperimentConfig &)> get;
  std::function<void(ExperimentConfig &, std::string_view)> set;
};

#define PLO_REAL(KEY, MEMBER)                                                   \
  Field {                                                                       \
    KEY, [](const ExperimentConfig &c) { return format_double(c.MEMBER); },     \
        [](ExperimentConfig &c, std::string_view v) { c.MEMBER = parse_real(KEY, v); } \
  }
#define PLO_INT(KEY, MEMBER)                                                    \
  Field {                                                                       \
    KEY, [](const ExperimentConfig &c) { return std::to_string(c.MEMBER); },    \
        [](ExperimentConfig &c, std::string_view v) {                           \
          c.MEMBER = parse_number<int>(KEY, v);                                 \
        }                                                                       \
  }
#define PLO_BOOL(KEY, MEMBER)                                                   \
  Field {                                                                       \
    KEY, [](const ExperimentConfig &c) { return std::string(c.MEMBER ? "true" : "false"); }, \
        [](ExperimentConfig &c, std::string_view v) { c.MEMBER = parse_bool(KEY, v); } \
  }
#define PLO_TEXT(KEY, MEMBER)                                                   \
  Field {                                                                       \
    KEY, [](const ExperimentConfig &c) { return c.MEMBER; },                    \
        [](ExperimentConfig &c, std::string_view v) { c.MEMBER = std::string(v); } \
  }

const std::vector<Field> &fields() {
  static const std::vector<Field> table = {
      Field{"seeds",
            [](const ExperimentConfig &c) {
              std::string s;
              for (std::size_t i = 0; i < c.seeds.size(); ++i)
                s += (i ? "," : "") + std::to_string(c.seeds[i]);
              return s;
            },
            [](ExperimentConfig &c, std::string_view v) {
              c.seeds = parse_seeds("seeds", v);
            }},
      Field{"env.kind",
            [](const ExperimentConfig &c) { return std::string(to_string(c.env.kind)); },
            [](ExperimentConfig &, std::string_view) {}},
      PLO_REAL("env.dt", env.dt),
      PLO_REAL("env.u_max", env.u_max),
      PLO_REAL("env.cart_mass", env.cart_mass),
      PLO_REAL("env.pole_mass", env.pole_mass),
      PLO_REAL("env.half_length", env.half_length),
      PLO_REAL("env.gravity", env.gravity),
      PLO_INT("policy.hidden_width", policy.hidden_width),
      PLO_INT("policy.hidden_layers", policy.hidden_layers),
      Field{"policy.activation", [](const ExperimentConfig &) { return std::string("tanh"); },
            [](ExperimentConfig &c, std::string_view v) {
              if (v != "tanh")
                throw ConfigError("invalid value '" + std::string(v) +
                                  "' for key policy.activation (expected tanh)");
              c.policy.activation = Activation::Tanh;
            }},
      PLO_INT("train.iterations", train.iterations),
      PLO_REAL("train.learning_rate", train.learning_rate),
      PLO_INT("train.checkpoint_period", train.checkpoint_period),
      PLO_INT("train.batch_size", train.batch_size),
      PLO_BOOL("train.record_time", train.record_time),
      PLO_INT("rollout.horizon", train.horizon),
      PLO_REAL("rollout.discount", train.discount),
      Field{"controller.kind",
            [](const ExperimentConfig &c) {
              return std::string(to_string(c.train.controller.kind));
            },
            [](ExperimentConfig &c, std::string_view v) {
              try {
                c.train.controller.kind = controller_kind_from_string(v);
              } catch (const ConfigError &e) {
                throw ConfigError(std::string("key controller.kind: ") + e.what());
              }
            }},
      PLO_REAL("controller.kp", train.controller.kp),
      PLO_REAL("controller.ki", train.controller.ki),
      PLO_REAL("controller.kd", train.controller.kd),
      PLO_REAL("controller.lambda_init", train.controller.lambda_init),
      PLO_REAL("controller.lambda_max", train.controller.lambda_max),
      PLO_REAL("controller.penalty_ratio", train.controller.penalty_ratio),
      PLO_BOOL("controller.penalty_proportional", train.controller.penalty_proportional),
      PLO_INT("plo.horizon", train.controller.plo.horizon),
      PLO_REAL("plo.regularization", train.controller.plo.regularization),
      PLO_REAL("plo.qp_tolerance", train.controller.plo.qp_tolerance),
      PLO_INT("plo.qp_max_iterations", train.controller.plo.qp_max_iterations),
      PLO_INT("eval.steps", eval.steps),
      PLO_REAL("eval.threshold", eval.threshold),
      PLO_INT("eval.first_points", eval.first_points),
      PLO_INT("eval.second_points", eval.second_points),
      PLO_INT("verify.n_instances", verify_instances),
      PLO_INT("synthetic.instances", synthetic_instances),
      PLO_INT("synthetic.steps", synthetic_steps),
      PLO_TEXT("output.dir", output_dir),
      PLO_TEXT("output.run_id", run_id),
  };
  return table;
}

#undef PLO_REAL
#undef PLO_INT
#undef PLO_BOOL
#undef PLO_TEXT

} // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty())
    throw ConfigError("seeds must list at least one seed");
  env.validate();
  policy_for(seeds.front()).validate();
  train.validate();
  train.controller.plo.qp_settings().validate();
  if (eval.steps < 1)
    throw ConfigError("eval.steps must be >= 1");
  if (!(eval.threshold >= 0.0))
    throw ConfigError("eval.threshold must be >= 0");
  if ((eval.first_points != 0 && eval.first_points < 2) ||
      (eval.second_points != 0 && eval.second_points < 2))
    throw ConfigError("eval grid points must be >= 2 (or 0 for the default)");
  if (verify_instances < 1)
    throw ConfigError("verify.n_instances must be >= 1");
  if (synthetic_instances < 1 || synthetic_steps < 1)
    throw ConfigError("synthetic.instances and synthetic.steps must be >= 1");
  if (output_dir.empty())
    throw ConfigError("output.dir must not be empty");
  if (run_id.find('/') != std::string::npos)
    throw ConfigError("output.run_id must not contain '/'");
}

PolicySpec ExperimentConfig::policy_for(std::uint64_t seed) const {
  PolicySpec spec = policy;
  spec.input_dim = env.state_dim();
  spec.output_dim = env.action_dim();
  spec.init_seed = seed;
  return spec;
}

TrainConfig ExperimentConfig::train_for(std::uint64_t seed) const {
  TrainConfig cfg = train;
  cfg.seed = seed;
  cfg.controller.plo.learning_rate = cfg.learning_rate;
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::pair<std::string, int>> entries;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!entries.emplace(key, std::make_pair(value, line_no)).second)
      throw ConfigError("duplicate key " + key + " (line " + std::to_string(line_no) + ")");
  }

  ExperimentConfig cfg;
  if (auto it = entries.find("env.kind"); it != entries.end()) {
    EnvKind kind;
    try {
      kind = env_kind_from_string(it->second.first);
    } catch (const ConfigError &e) {
      throw ConfigError(std::string("key env.kind: ") + e.what());
    }
    cfg.env = kind == EnvKind::Cartpole ? EnvModel::cartpole() : EnvModel::double_integrator();
  }
  for (const auto &[key, entry] : entries) {
    const Field *field = nullptr;
    for (const auto &f : fields())
      if (key == f.key)
        field = &f;
    if (!field)
      throw ConfigError("unknown config key " + key + " (line " +
                        std::to_string(entry.second) + ")");
    field->set(cfg, entry.first);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const ExperimentConfig &cfg) {
  std::string out;
  for (const auto &f : fields())
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

void save_config(const std::filesystem::path &path, const ExperimentConfig &cfg) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << serialize_config(cfg);
  if (!out)
    throw IoError("failed writing " + path.string());
}

} // namespace plo
