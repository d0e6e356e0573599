#include "powerlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>

#include "powerlab/errors.hpp"
#include "powerlab/format.hpp"

namespace powerlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs task(i) for i in [0, n) on up to `jobs` threads. Tasks share nothing;
// the exception of the lowest failing index is rethrown after all finish.
template <typename Task>
void parallel_for(std::size_t n, std::size_t jobs, Task&& task) {
  std::vector<std::exception_ptr> errors(n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < std::min(jobs, n); ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << contents;
  if (!out) throw ConfigError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

std::string failure(const std::exception& e, std::string_view what) {
  return std::string(what) + ": " + e.what();
}

template <typename Fn>
auto with_context(std::string_view context, Fn&& fn) {
  try {
    return fn();
  } catch (const TrainingError& e) {
    throw TrainingError(failure(e, context));
  } catch (const ConfigError& e) {
    throw ConfigError(failure(e, context));
  } catch (const std::exception& e) {
    throw std::runtime_error(failure(e, context));
  }
}

std::string run_label(PolicyKind policy, std::uint64_t seed) {
  return "policy " + std::string(policy_name(policy)) + ", seed " + std::to_string(seed);
}

fs::path seed_dir(const fs::path& root, std::uint64_t seed) {
  return root / "train" / ("seed_" + std::to_string(seed));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// --- comparison table persistence ---------------------------------------

const fs::path kComparisonJson = "comparison.json";
const fs::path kComparisonCsv = "comparison.csv";

json row_json(const PolicyRow& row, const std::vector<std::uint64_t>& seeds) {
  json per_seed = json::array();
  for (std::size_t i = 0; i < row.per_seed.size(); ++i) {
    per_seed.push_back({{"seed", seeds.at(i)}, {"report", to_json(row.per_seed[i])}});
  }
  return {{"policy", policy_name(row.policy)}, {"mean", to_json(row.mean)}, {"per_seed", per_seed}};
}

// Merges `rows` into the table already on disk (if any), replacing rows of
// the same policy, and rewrites comparison.json / comparison.csv.
fs::path store_comparison(const fs::path& dir, const std::vector<json>& rows) {
  std::map<int, json> by_policy;
  const fs::path json_path = dir / kComparisonJson;
  if (fs::exists(json_path)) {
    const json old = json::parse(read_file(json_path));
    for (const json& r : old.at("rows")) {
      by_policy[static_cast<int>(parse_policy(r.at("policy").get<std::string>()))] = r;
    }
  }
  for (const json& r : rows) {
    by_policy[static_cast<int>(parse_policy(r.at("policy").get<std::string>()))] = r;
  }
  json table{{"rows", json::array()}};
  std::ostringstream csv;
  csv << "policy,throughput,fairness,energy_efficiency,mean_latency\n";
  for (const auto& [_, r] : by_policy) {
    table["rows"].push_back(r);
    const MetricsReport m = report_from_json(r.at("mean"));
    csv << r.at("policy").get<std::string>() << ',' << format_double(m.throughput) << ','
        << format_optional(m.fairness) << ',' << format_optional(m.energy_efficiency) << ','
        << format_double(m.mean_latency) << '\n';
  }
  write_json(json_path, table);
  write_file(dir / kComparisonCsv, csv.str());
  return dir / kComparisonCsv;
}

json oracle_json(const OracleComparison& c) {
  return {{"greedy_mean_reward", c.greedy_mean_reward},
          {"oracle_mean_reward", c.oracle_mean_reward},
          {"greedy_mean_sum_rate", c.greedy_mean_sum_rate},
          {"action_agreement", c.action_agreement},
          {"states", c.states}};
}

}  // namespace

// --- simulation ----------------------------------------------------------

MetricsReport simulate_policy(PolicyKind policy, const ExperimentConfig& config,
                              std::uint64_t steps, std::uint64_t seed, const DqnAgent* agent) {
  const EnvParams& env = config.env;
  if (steps == 0) throw ContractViolation("simulate_policy: steps must be positive");
  if (policy == PolicyKind::LearnedGreedy && agent == nullptr) {
    throw ConfigError("policy 'dqn' needs a trained agent (set experiment.checkpoint)");
  }
  Rng channel = make_stream(seed, Stream::Channel);
  Rng policy_rng = make_stream(seed, Stream::Policy);

  TrajectoryRecord traj(env.n_users);
  traj.reserve(steps);
  ChannelState state = sample_channel(env, channel);
  QueueState queues = empty_queues(env);
  for (std::uint64_t t = 0; t < steps; ++t) {
    StepOutcome out;
    switch (policy) {
      case PolicyKind::Fixed:
        out = step(state, fixed_policy(state, env), queues, env, channel);
        break;
      case PolicyKind::Random:
        out = step(state, random_policy(state, env, policy_rng), queues, env, channel);
        break;
      case PolicyKind::MyopicOracle:
        out = step(state, myopic_oracle(state, env), queues, env, channel);
        break;
      case PolicyKind::LearnedGreedy:
        out = step(state,
                   decode_action(greedy_action(agent->online, state), env.n_users,
                                 env.num_levels()),
                   queues, env, channel);
        break;
      case PolicyKind::WaterFilling: {
        const WaterFillDecision wf = waterfill_policy(state, env, config.waterfill);
        out = step_with_powers(state, wf.powers, queues, env, channel);
        break;
      }
    }
    traj.record(out.rates, out.powers_used, out.next_queues.backlogs);
    state = std::move(out.next_state);
    queues = std::move(out.next_queues);
  }
  return build_report(traj, config.fairness_mode);
}

MetricsReport average_reports(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw ContractViolation("average_reports: no reports");
  MetricsReport avg;
  const std::size_t n_users = reports.front().per_user_rate.size();
  avg.fairness_mode = reports.front().fairness_mode;
  avg.per_user_rate.assign(n_users, 0.0);
  avg.per_user_latency.assign(n_users, 0.0);
  avg.per_user_delay_ratio.assign(n_users, std::nullopt);
  const auto mean_optional = [&](auto get) -> std::optional<double> {
    double s = 0.0;
    std::size_t c = 0;
    for (const MetricsReport& r : reports) {
      if (const std::optional<double> v = get(r)) {
        s += *v;
        ++c;
      }
    }
    return c > 0 ? std::optional<double>(s / static_cast<double>(c)) : std::nullopt;
  };
  const double n = static_cast<double>(reports.size());
  for (const MetricsReport& r : reports) {
    if (r.per_user_rate.size() != n_users) {
      throw ContractViolation("average_reports: user counts differ");
    }
    avg.throughput += r.throughput / n;
    avg.mean_latency += r.mean_latency / n;
    avg.steps += r.steps;
    for (std::size_t i = 0; i < n_users; ++i) {
      avg.per_user_rate[i] += r.per_user_rate[i] / n;
      avg.per_user_latency[i] += r.per_user_latency[i] / n;
    }
  }
  avg.fairness = mean_optional([](const MetricsReport& r) { return r.fairness; });
  avg.energy_efficiency =
      mean_optional([](const MetricsReport& r) { return r.energy_efficiency; });
  for (std::size_t i = 0; i < n_users; ++i) {
    avg.per_user_delay_ratio[i] =
        mean_optional([i](const MetricsReport& r) { return r.per_user_delay_ratio[i]; });
  }
  return avg;
}

const PolicyRow* ComparisonTable::find(PolicyKind policy) const {
  for (const PolicyRow& r : rows) {
    if (r.policy == policy) return &r;
  }
  return nullptr;
}

json manifest_json(const ExperimentConfig& config, const char* command) {
  return {{"code_version", kCodeVersion}, {"command", command}, {"config", to_json(config)}};
}

// --- compare ---------------------------------------------------------------

ComparisonTable run_comparison(const ExperimentConfig& config) {
  config.validate();
  std::optional<DqnAgent> agent;
  if (std::find(config.policies.begin(), config.policies.end(), PolicyKind::LearnedGreedy) !=
      config.policies.end()) {
    if (!config.checkpoint) {
      throw ConfigError("compare: policy 'dqn' requires experiment.checkpoint");
    }
    agent = make_agent(config.env, config.train, load_checkpoint(*config.checkpoint));
  }

  const std::size_t n_seeds = config.seeds.size();
  const std::size_t n_tasks = config.policies.size() * n_seeds;
  std::vector<MetricsReport> reports(n_tasks);
  parallel_for(n_tasks, config.jobs, [&](std::size_t i) {
    const PolicyKind policy = config.policies[i / n_seeds];
    const std::uint64_t seed = config.seeds[i % n_seeds];
    reports[i] = with_context(run_label(policy, seed), [&] {
      return simulate_policy(policy, config, config.evaluation_steps, seed,
                             agent ? &*agent : nullptr);
    });
  });

  ComparisonTable table;
  std::vector<json> rows;
  for (std::size_t p = 0; p < config.policies.size(); ++p) {
    PolicyRow row;
    row.policy = config.policies[p];
    row.per_seed.assign(reports.begin() + static_cast<std::ptrdiff_t>(p * n_seeds),
                        reports.begin() + static_cast<std::ptrdiff_t>((p + 1) * n_seeds));
    row.mean = average_reports(row.per_seed);
    rows.push_back(row_json(row, config.seeds));
    table.rows.push_back(std::move(row));
  }
  fs::create_directories(config.output_directory);
  store_comparison(config.output_directory, rows);
  write_json(config.output_directory / "manifest_compare.json", manifest_json(config, "compare"));
  return table;
}

// --- train -----------------------------------------------------------------

double leading_mean_reward(const TrainingLog& log, double fraction) {
  const std::size_t n = log.episodes.size();
  const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * n));
  if (n == 0) throw ContractViolation("leading_mean_reward: empty log");
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += log.episodes[i].cumulative_reward;
  return s / static_cast<double>(k);
}

double trailing_mean_reward(const TrainingLog& log, double fraction) {
  const std::size_t n = log.episodes.size();
  const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * n));
  if (n == 0) throw ContractViolation("trailing_mean_reward: empty log");
  double s = 0.0;
  for (std::size_t i = n - k; i < n; ++i) s += log.episodes[i].cumulative_reward;
  return s / static_cast<double>(k);
}

RunArtifacts run_training(const ExperimentConfig& config) {
  config.validate();
  const fs::path& out = config.output_directory;
  const std::size_t n = config.seeds.size();
  std::vector<SeedResult> results(n);
  std::vector<std::vector<fs::path>> checkpoints(n);

  parallel_for(n, config.jobs, [&](std::size_t i) {
    const std::uint64_t seed = config.seeds[i];
    with_context(run_label(PolicyKind::LearnedGreedy, seed), [&] {
      const fs::path dir = seed_dir(out, seed);
      fs::create_directories(dir / "checkpoints");
      TrainConfig train_cfg = config.train;
      train_cfg.seed = seed;
      DqnAgent agent = make_agent(config.env, train_cfg);

      TrainCallbacks callbacks;
      if (config.checkpoint_interval > 0) {
        callbacks.on_episode_end = [&](const EpisodeLog& e, const DqnAgent& a) {
          if ((e.episode + 1) % config.checkpoint_interval != 0) return;
          const fs::path p =
              dir / "checkpoints" / ("episode_" + std::to_string(e.episode + 1) + ".bin");
          save_checkpoint(a.online, p);
          checkpoints[i].push_back(p);
        };
      }
      SeedResult& r = results[i];
      r.seed = seed;
      r.log = train(agent, callbacks, config.fairness_mode);
      const fs::path final_ckpt = dir / "checkpoints" / "final.bin";
      save_checkpoint(agent.online, final_ckpt);
      checkpoints[i].push_back(final_ckpt);

      std::ostringstream csv;
      write_training_csv(r.log, csv);
      write_file(dir / "training_log.csv", csv.str());

      Rng eval_rng = make_stream(seed, Stream::Evaluation);
      r.greedy = evaluate_greedy(agent, config.greedy_eval_steps, eval_rng, config.fairness_mode);
      Rng oracle_rng = make_stream(seed, Stream::OracleCheck);
      r.oracle = compare_with_oracle(agent, config.greedy_eval_steps, oracle_rng);
      write_json(dir / "metrics.json",
                 {{"seed", seed},
                  {"greedy", to_json(r.greedy)},
                  {"oracle_comparison", oracle_json(r.oracle)},
                  {"learn_steps", r.log.learn_steps},
                  {"target_syncs", r.log.sync_steps.size()}});
      return 0;
    });
  });

  RunArtifacts artifacts;
  PolicyRow row;
  row.policy = PolicyKind::LearnedGreedy;
  for (std::size_t i = 0; i < n; ++i) {
    const fs::path dir = seed_dir(out, config.seeds[i]);
    artifacts.training_logs.push_back(dir / "training_log.csv");
    artifacts.metrics.push_back(dir / "metrics.json");
    artifacts.checkpoints.insert(artifacts.checkpoints.end(), checkpoints[i].begin(),
                                 checkpoints[i].end());
    row.per_seed.push_back(results[i].greedy);
  }
  row.mean = average_reports(row.per_seed);
  artifacts.comparison_table = store_comparison(out, {row_json(row, config.seeds)});
  artifacts.manifest = out / "manifest_train.json";
  write_json(artifacts.manifest, manifest_json(config, "train"));
  artifacts.results = std::move(results);
  return artifacts;
}

// --- ablate ----------------------------------------------------------------

AblationReport run_ablation(const ExperimentConfig& config,
                            const std::vector<double>& decay_rates) {
  config.validate();
  if (decay_rates.size() < 2) throw ConfigError("ablate: need at least two decay rates");
  if (config.seeds.size() < 3) throw ConfigError("ablate: need at least three seeds per rate");
  const std::size_t n_seeds = config.seeds.size();
  const std::size_t n_tasks = decay_rates.size() * n_seeds;
  std::vector<TrainingLog> logs(n_tasks);

  parallel_for(n_tasks, config.jobs, [&](std::size_t i) {
    const double rate = decay_rates[i / n_seeds];
    const std::uint64_t seed = config.seeds[i % n_seeds];
    logs[i] = with_context("decay " + format_double(rate) + ", seed " + std::to_string(seed), [&] {
      TrainConfig cfg = config.train;
      cfg.seed = seed;
      cfg.schedule =
          EpsilonSchedule::exponential(config.train.schedule.start, config.train.schedule.end, rate);
      DqnAgent agent = make_agent(config.env, cfg);
      return train(agent, {}, config.fairness_mode);
    });
  });

  AblationReport report;
  std::ostringstream curves;
  curves << "decay_rate,seed,episode,cumulative_reward,epsilon,mean_loss\n";
  std::ostringstream summary;
  summary << "decay_rate,final_reward_mean,final_reward_std,reward_variance,mean_epsilon,"
             "floor_episode\n";
  json summary_json = json::array();

  for (std::size_t a = 0; a < decay_rates.size(); ++a) {
    AblationArm arm;
    arm.decay_rate = decay_rates[a];
    arm.seeds = config.seeds;
    std::vector<double> finals;
    std::vector<double> variances;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      TrainingLog& log = logs[a * n_seeds + s];
      finals.push_back(trailing_mean_reward(log, 0.1));
      std::vector<double> rewards;
      for (const EpisodeLog& e : log.episodes) {
        rewards.push_back(e.cumulative_reward);
        curves << format_double(arm.decay_rate) << ',' << config.seeds[s] << ',' << e.episode
               << ',' << format_double(e.cumulative_reward) << ',' << format_double(e.epsilon)
               << ',' << format_optional(e.mean_loss) << '\n';
      }
      const double sd = sample_std(rewards);
      variances.push_back(sd * sd);
      arm.logs.push_back(std::move(log));
    }
    arm.final_reward_mean = mean_of(finals);
    arm.final_reward_std = sample_std(finals);
    arm.reward_variance = mean_of(variances);
    std::vector<double> eps;
    for (const EpisodeLog& e : arm.logs.front().episodes) {
      eps.push_back(e.epsilon);
      if (!arm.floor_episode && e.epsilon <= config.train.schedule.end) {
        arm.floor_episode = e.episode;
      }
    }
    arm.mean_epsilon = mean_of(eps);

    const std::string floor_text =
        arm.floor_episode ? std::to_string(*arm.floor_episode) : std::string();
    summary << format_double(arm.decay_rate) << ',' << format_double(arm.final_reward_mean) << ','
            << format_double(arm.final_reward_std) << ',' << format_double(arm.reward_variance)
            << ',' << format_double(arm.mean_epsilon) << ',' << floor_text << '\n';
    summary_json.push_back({{"decay_rate", arm.decay_rate},
                            {"final_reward_mean", arm.final_reward_mean},
                            {"final_reward_std", arm.final_reward_std},
                            {"reward_variance", arm.reward_variance},
                            {"mean_epsilon", arm.mean_epsilon},
                            {"floor_episode", arm.floor_episode ? json(*arm.floor_episode)
                                                                : json(nullptr)},
                            {"seeds", arm.seeds}});
    report.arms.push_back(std::move(arm));
  }

  const fs::path dir = config.output_directory / "ablation";
  write_file(dir / "curves.csv", curves.str());
  write_file(dir / "summary.csv", summary.str());
  write_json(dir / "summary.json", {{"arms", summary_json}});
  write_json(dir / "manifest.json", manifest_json(config, "ablate"));
  return report;
}

// --- calibrate-wf ----------------------------------------------------------

CalibrationTable calibrate_waterfill(const ExperimentConfig& config,
                                     const std::vector<double>& budgets) {
  config.validate();
  if (budgets.size() < 2) throw ConfigError("calibrate-wf: need at least two budgets");
  for (double b : budgets) {
    if (!(b >= 0.0)) throw ConfigError("calibrate-wf: budgets must be >= 0");
  }
  const EnvParams& env = config.env;
  const std::size_t n_seeds = config.seeds.size();
  const std::size_t n_tasks = budgets.size() * n_seeds;
  struct Partial {
    double sum_rate = 0.0;
    double energy = 0.0;
    double jain_sum = 0.0;
    std::uint64_t jain_count = 0;
  };
  std::vector<Partial> partial(n_tasks);

  parallel_for(n_tasks, config.jobs, [&](std::size_t i) {
    const double budget = budgets[i / n_seeds];
    // Every budget sees the same channel draws for a given seed.
    Rng channel = make_stream(config.seeds[i % n_seeds], Stream::Channel);
    Partial& p = partial[i];
    std::vector<double> rates(env.n_users);
    for (std::uint64_t t = 0; t < config.calibration_draws; ++t) {
      const ChannelState s = sample_channel(env, channel);
      const WaterFillResult wf = waterfill_allocate(s, env.noise_power, budget, config.waterfill);
      for (std::size_t u = 0; u < env.n_users; ++u) {
        rates[u] = compute_rate(compute_snr(wf.powers[u], s.gains[u], env.noise_power));
        p.sum_rate += rates[u];
        p.energy += wf.powers[u];
      }
      if (const auto j = jain_index(rates)) {
        p.jain_sum += *j;
        ++p.jain_count;
      }
    }
  });

  CalibrationTable table;
  table.target = config.calibration_target;
  std::ostringstream csv;
  csv << "budget,sum_rate,energy_efficiency,fairness\n";
  json rows = json::array();
  double best_gap = 0.0;
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    Partial total;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const Partial& p = partial[b * n_seeds + s];
      total.sum_rate += p.sum_rate;
      total.energy += p.energy;
      total.jain_sum += p.jain_sum;
      total.jain_count += p.jain_count;
    }
    const double draws = static_cast<double>(config.calibration_draws * n_seeds);
    CalibrationRow row;
    row.budget = budgets[b];
    row.sum_rate = total.sum_rate / draws;
    if (total.energy > 0.0) row.energy_efficiency = total.sum_rate / total.energy;
    if (total.jain_count > 0) {
      row.fairness = total.jain_sum / static_cast<double>(total.jain_count);
    }
    const double gap = std::abs(row.sum_rate - table.target);
    if (b == 0 || gap < best_gap) {
      best_gap = gap;
      table.best_budget = row.budget;
    }
    csv << format_double(row.budget) << ',' << format_double(row.sum_rate) << ','
        << format_optional(row.energy_efficiency) << ',' << format_optional(row.fairness) << '\n';
    rows.push_back({{"budget", row.budget},
                    {"sum_rate", row.sum_rate},
                    {"energy_efficiency", row.energy_efficiency ? json(*row.energy_efficiency)
                                                                : json(nullptr)},
                    {"fairness", row.fairness ? json(*row.fairness) : json(nullptr)}});
    table.rows.push_back(row);
  }
  const fs::path dir = config.output_directory;
  write_file(dir / "calibration.csv", csv.str());
  write_json(dir / "calibration.json",
             {{"target", table.target}, {"best_budget", table.best_budget}, {"rows", rows}});
  write_json(dir / "manifest_calibrate.json", manifest_json(config, "calibrate-wf"));
  return table;
}

// --- emit-plots ------------------------------------------------------------

PlotFiles emit_plot_data(const fs::path& directory) {
  PlotFiles files;

  // Training curves: one row per (seed, episode).
  std::vector<std::pair<std::uint64_t, fs::path>> logs;
  const fs::path train_root = directory / "train";
  if (fs::is_directory(train_root)) {
    for (const auto& entry : fs::directory_iterator(train_root)) {
      const std::string name = entry.path().filename().string();
      const fs::path log = entry.path() / "training_log.csv";
      if (name.rfind("seed_", 0) == 0 && fs::exists(log)) {
        logs.emplace_back(std::stoull(name.substr(5)), log);
      }
    }
  }
  std::sort(logs.begin(), logs.end());

  const fs::path comparison = directory / kComparisonJson;
  if (logs.empty() && !fs::exists(comparison)) {
    throw ConfigError("emit-plots: no comparison.json or training logs under " +
                      directory.string());
  }

  if (!logs.empty()) {
    std::ostringstream out;
    out << "seed,episode,cumulative_reward,mean_loss,epsilon,sum_rate,fairness,"
           "energy_efficiency,mean_latency\n";
    for (const auto& [seed, path] : logs) {
      std::istringstream in(read_file(path));
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        if (!line.empty()) out << seed << ',' << line << '\n';
      }
    }
    files.training = directory / "plot_training.csv";
    write_file(files.training, out.str());
  }

  if (fs::exists(comparison)) {
    const json table = json::parse(read_file(comparison));
    std::ostringstream out;
    out << "policy,user,rate,latency,delay_ratio\n";
    for (const json& row : table.at("rows")) {
      const MetricsReport m = report_from_json(row.at("mean"));
      for (std::size_t u = 0; u < m.per_user_rate.size(); ++u) {
        out << row.at("policy").get<std::string>() << ',' << u << ','
            << format_double(m.per_user_rate[u]) << ',' << format_double(m.per_user_latency[u])
            << ',' << format_optional(m.per_user_delay_ratio[u]) << '\n';
      }
    }
    files.per_user = directory / "plot_per_user.csv";
    write_file(files.per_user, out.str());
  }
  return files;
}

}  // namespace powerlab
