#include "powerlab/config.hpp"

#include <fstream>
#include <set>

#include "powerlab/errors.hpp"

namespace powerlab {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("config: unknown key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value for '" + where + "." + key + "': " + e.what());
  }
}

std::string arrival_name(ArrivalKind k) {
  return k == ArrivalKind::Constant ? "constant" : "bernoulli";
}

ArrivalKind parse_arrival(const std::string& s) {
  if (s == "constant") return ArrivalKind::Constant;
  if (s == "bernoulli") return ArrivalKind::Bernoulli;
  throw ConfigError("config: unknown arrival_kind '" + s + "'");
}

std::string schedule_name(EpsilonSchedule::Kind k) {
  return k == EpsilonSchedule::Kind::Linear ? "linear" : "exponential";
}

EpsilonSchedule::Kind parse_schedule(const std::string& s) {
  if (s == "linear") return EpsilonSchedule::Kind::Linear;
  if (s == "exponential") return EpsilonSchedule::Kind::Exponential;
  throw ConfigError("config: unknown schedule kind '" + s + "'");
}

void parse_env(const json& j, EnvParams& env) {
  reject_unknown(j, "env",
                 {"n_users", "power_levels", "noise_power", "h_min", "h_max", "lambda_penalty",
                  "gamma", "arrival_rate", "arrival_kind", "arrival_burst"});
  read(j, "n_users", env.n_users, "env");
  read(j, "power_levels", env.power_levels, "env");
  read(j, "noise_power", env.noise_power, "env");
  read(j, "h_min", env.h_min, "env");
  read(j, "h_max", env.h_max, "env");
  read(j, "lambda_penalty", env.lambda_penalty, "env");
  read(j, "gamma", env.gamma, "env");
  read(j, "arrival_rate", env.arrival_rate, "env");
  read(j, "arrival_burst", env.arrival_burst, "env");
  std::string kind = arrival_name(env.arrival_kind);
  read(j, "arrival_kind", kind, "env");
  env.arrival_kind = parse_arrival(kind);
}

void parse_schedule_block(const json& j, EpsilonSchedule& s) {
  reject_unknown(j, "train.schedule", {"kind", "start", "end", "horizon_steps", "decay_rate"});
  std::string kind = schedule_name(s.kind);
  read(j, "kind", kind, "train.schedule");
  s.kind = parse_schedule(kind);
  read(j, "start", s.start, "train.schedule");
  read(j, "end", s.end, "train.schedule");
  read(j, "horizon_steps", s.horizon_steps, "train.schedule");
  read(j, "decay_rate", s.decay_rate, "train.schedule");
}

void parse_train(const json& j, TrainConfig& t) {
  reject_unknown(j, "train",
                 {"total_steps", "episode_length", "batch_size", "target_sync_period",
                  "learning_rate", "learning_rate_final", "warmup_steps", "replay_capacity", "hidden_layers",
                  "grad_clip_norm", "seed", "schedule"});
  read(j, "total_steps", t.total_steps, "train");
  read(j, "episode_length", t.episode_length, "train");
  read(j, "batch_size", t.batch_size, "train");
  read(j, "target_sync_period", t.target_sync_period, "train");
  read(j, "learning_rate", t.learning_rate, "train");
  read(j, "learning_rate_final", t.learning_rate_final, "train");
  read(j, "warmup_steps", t.warmup_steps, "train");
  read(j, "replay_capacity", t.replay_capacity, "train");
  read(j, "hidden_layers", t.hidden_layers, "train");
  read(j, "grad_clip_norm", t.grad_clip_norm, "train");
  read(j, "seed", t.seed, "train");
  if (j.contains("schedule")) parse_schedule_block(j.at("schedule"), t.schedule);
}

void parse_waterfill(const json& j, WaterFillConfig& w) {
  reject_unknown(j, "waterfill", {"total_power", "tolerance", "max_iterations"});
  read(j, "total_power", w.total_power, "waterfill");
  read(j, "tolerance", w.tolerance, "waterfill");
  read(j, "max_iterations", w.max_iterations, "waterfill");
}

void parse_experiment(const json& j, ExperimentConfig& c) {
  reject_unknown(j, "experiment",
                 {"policies", "evaluation_steps", "greedy_eval_steps", "seeds",
                  "output_directory", "fairness_mode", "jobs", "checkpoint_interval",
                  "decay_rates", "budgets", "calibration_target", "calibration_draws",
                  "checkpoint"});
  if (j.contains("policies")) {
    std::vector<std::string> names;
    read(j, "policies", names, "experiment");
    c.policies.clear();
    for (const auto& n : names) c.policies.push_back(parse_policy(n));
  }
  read(j, "evaluation_steps", c.evaluation_steps, "experiment");
  read(j, "greedy_eval_steps", c.greedy_eval_steps, "experiment");
  read(j, "seeds", c.seeds, "experiment");
  std::string out = c.output_directory.string();
  read(j, "output_directory", out, "experiment");
  c.output_directory = out;
  std::string mode(fairness_mode_name(c.fairness_mode));
  read(j, "fairness_mode", mode, "experiment");
  c.fairness_mode = parse_fairness_mode(mode);
  read(j, "jobs", c.jobs, "experiment");
  read(j, "checkpoint_interval", c.checkpoint_interval, "experiment");
  read(j, "decay_rates", c.decay_rates, "experiment");
  read(j, "budgets", c.budgets, "experiment");
  read(j, "calibration_target", c.calibration_target, "experiment");
  read(j, "calibration_draws", c.calibration_draws, "experiment");
  if (j.contains("checkpoint")) {
    if (j.at("checkpoint").is_null()) {
      c.checkpoint.reset();
    } else {
      std::string p;
      read(j, "checkpoint", p, "experiment");
      c.checkpoint = p;
    }
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  env.validate();
  train.validate();
  waterfill.validate();
  if (seeds.empty()) throw ConfigError("experiment: at least one seed is required");
  if (policies.empty()) throw ConfigError("experiment: no policies selected");
  if (evaluation_steps == 0) throw ConfigError("experiment: evaluation_steps must be positive");
  if (greedy_eval_steps == 0) throw ConfigError("experiment: greedy_eval_steps must be positive");
  if (jobs == 0) throw ConfigError("experiment: jobs must be positive");
  if (calibration_draws == 0) throw ConfigError("experiment: calibration_draws must be positive");
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j, "<root>", {"env", "train", "waterfill", "experiment"});
  ExperimentConfig c;
  if (j.contains("env")) parse_env(j.at("env"), c.env);
  if (j.contains("train")) parse_train(j.at("train"), c.train);
  if (j.contains("waterfill")) parse_waterfill(j.at("waterfill"), c.waterfill);
  if (j.contains("experiment")) parse_experiment(j.at("experiment"), c);
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json policies = json::array();
  for (PolicyKind p : c.policies) policies.push_back(policy_name(p));
  const EpsilonSchedule& s = c.train.schedule;
  return json{
      {"env",
       {{"n_users", c.env.n_users},
        {"power_levels", c.env.power_levels},
        {"noise_power", c.env.noise_power},
        {"h_min", c.env.h_min},
        {"h_max", c.env.h_max},
        {"lambda_penalty", c.env.lambda_penalty},
        {"gamma", c.env.gamma},
        {"arrival_rate", c.env.arrival_rate},
        {"arrival_kind", arrival_name(c.env.arrival_kind)},
        {"arrival_burst", c.env.arrival_burst}}},
      {"train",
       {{"total_steps", c.train.total_steps},
        {"episode_length", c.train.episode_length},
        {"batch_size", c.train.batch_size},
        {"target_sync_period", c.train.target_sync_period},
        {"learning_rate", c.train.learning_rate},
        {"learning_rate_final", c.train.learning_rate_final},
        {"warmup_steps", c.train.warmup_steps},
        {"replay_capacity", c.train.replay_capacity},
        {"hidden_layers", c.train.hidden_layers},
        {"grad_clip_norm", c.train.grad_clip_norm},
        {"seed", c.train.seed},
        {"schedule",
         {{"kind", schedule_name(s.kind)},
          {"start", s.start},
          {"end", s.end},
          {"horizon_steps", s.horizon_steps},
          {"decay_rate", s.decay_rate}}}}},
      {"waterfill",
       {{"total_power", c.waterfill.total_power},
        {"tolerance", c.waterfill.tolerance},
        {"max_iterations", c.waterfill.max_iterations}}},
      {"experiment",
       {{"policies", policies},
        {"evaluation_steps", c.evaluation_steps},
        {"greedy_eval_steps", c.greedy_eval_steps},
        {"seeds", c.seeds},
        {"output_directory", c.output_directory.string()},
        {"fairness_mode", fairness_mode_name(c.fairness_mode)},
        {"jobs", c.jobs},
        {"checkpoint_interval", c.checkpoint_interval},
        {"decay_rates", c.decay_rates},
        {"budgets", c.budgets},
        {"calibration_target", c.calibration_target},
        {"calibration_draws", c.calibration_draws},
        {"checkpoint", c.checkpoint ? json(c.checkpoint->string()) : json(nullptr)}}},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  // Run manifests embed the full configuration under "config".
  if (j.is_object() && j.contains("code_version") && j.contains("config")) {
    return config_from_json(j.at("config"));
  }
  return config_from_json(j);
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like section.key=value: " + assignment);
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("override has an empty key: " + assignment);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace powerlab
