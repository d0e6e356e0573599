// powerlab: command-line runner for the power-allocation experiments.
//
//   powerlab compare      [--config f] [--seed s ...] [--out dir] [--policy p ...]
//   powerlab train        [--config f] [--seed s ...] [--out dir]
//   powerlab ablate       [--config f] [--seed s ...] [--out dir] [--decay r ...]
//   powerlab calibrate-wf [--config f] [--seed s ...] [--out dir] [--budget w ...]
//   powerlab emit-plots   [--out dir]
//
// Any config field can be overridden with --set section.key=value.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "powerlab/config.hpp"
#include "powerlab/errors.hpp"
#include "powerlab/format.hpp"
#include "powerlab/harness.hpp"
#include "powerlab/kernels.hpp"

using nlohmann::json;
using namespace powerlab;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::vector<std::string> overrides;
  std::size_t jobs = 0;
  std::string kernels;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON config file or run manifest")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seeds, "master seed (repeatable; default from config: 1..5)");
  cmd->add_option("--out", o.out, "output directory (default from config: results)");
  cmd->add_option("--set", o.overrides, "override a config field, e.g. train.total_steps=20000");
  cmd->add_option("--jobs", o.jobs, "worker threads");
  cmd->add_option("--kernels", o.kernels, "force kernel backend: scalar, avx2 or neon");
}

json load_raw(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (j.is_object() && j.contains("code_version") && j.contains("config")) return j.at("config");
  return j;
}

ExperimentConfig resolve(const CommonOptions& o, const std::vector<std::string>& extra = {}) {
  if (!o.kernels.empty()) kernels::select_backend(kernels::parse_backend(o.kernels));
  json j = load_raw(o.config_path);
  for (const std::string& s : o.overrides) apply_override(j, s);
  for (const std::string& s : extra) apply_override(j, s);
  if (!o.seeds.empty()) j["experiment"]["seeds"] = o.seeds;
  if (!o.out.empty()) j["experiment"]["output_directory"] = o.out;
  if (o.jobs > 0) j["experiment"]["jobs"] = o.jobs;
  return config_from_json(j);
}

std::string list_json(const std::vector<double>& v) { return json(v).dump(); }

void print_table(const ComparisonTable& table) {
  std::cout << "policy,throughput,fairness,energy_efficiency,mean_latency\n";
  for (const PolicyRow& r : table.rows) {
    std::cout << policy_name(r.policy) << ',' << format_double(r.mean.throughput) << ','
              << format_optional(r.mean.fairness) << ','
              << format_optional(r.mean.energy_efficiency) << ','
              << format_double(r.mean.mean_latency) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Downlink power-allocation experiments"};
  app.require_subcommand(1);

  CommonOptions compare_opts, train_opts, ablate_opts, calib_opts;
  std::vector<std::string> policies;
  std::string checkpoint;
  std::vector<double> decays, budgets;
  std::string plots_dir = "results";

  CLI::App* compare = app.add_subcommand("compare", "evaluate baseline policies and write the comparison table");
  add_common(compare, compare_opts);
  compare->add_option("--policy", policies, "fixed, random, waterfilling, oracle or dqn (repeatable)");
  compare->add_option("--checkpoint", checkpoint, "trained network for the dqn policy");

  CLI::App* train_cmd = app.add_subcommand("train", "train one DQN agent per seed");
  add_common(train_cmd, train_opts);

  CLI::App* ablate = app.add_subcommand("ablate", "exponential epsilon-decay study");
  add_common(ablate, ablate_opts);
  ablate->add_option("--decay", decays, "decay rates (repeatable; default 0.99 0.98 0.95 0.90)");

  CLI::App* calib = app.add_subcommand("calibrate-wf", "water-filling sum-rate per power budget");
  add_common(calib, calib_opts);
  calib->add_option("--budget", budgets, "total power budgets in watts (repeatable)");

  CLI::App* plots = app.add_subcommand("emit-plots", "write plot-ready CSVs from existing results");
  plots->add_option("--out", plots_dir, "results directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compare->parsed()) {
      std::vector<std::string> extra;
      if (!policies.empty()) extra.push_back("experiment.policies=" + json(policies).dump());
      if (!checkpoint.empty()) extra.push_back("experiment.checkpoint=" + json(checkpoint).dump());
      const ExperimentConfig config = resolve(compare_opts, extra);
      print_table(run_comparison(config));
    } else if (train_cmd->parsed()) {
      const ExperimentConfig config = resolve(train_opts);
      const RunArtifacts artifacts = run_training(config);
      std::cout << "seed,first_reward,last_reward,greedy_sum_rate,oracle_agreement\n";
      for (const SeedResult& r : artifacts.results) {
        std::cout << r.seed << ',' << format_double(leading_mean_reward(r.log, 0.1)) << ','
                  << format_double(trailing_mean_reward(r.log, 0.1)) << ','
                  << format_double(r.greedy.throughput) << ','
                  << format_double(r.oracle.action_agreement) << '\n';
      }
    } else if (ablate->parsed()) {
      std::vector<std::string> extra;
      if (!decays.empty()) extra.push_back("experiment.decay_rates=" + list_json(decays));
      const ExperimentConfig config = resolve(ablate_opts, extra);
      const AblationReport report = run_ablation(config, config.decay_rates);
      std::cout << "decay_rate,final_reward_mean,final_reward_std,reward_variance,mean_epsilon\n";
      for (const AblationArm& a : report.arms) {
        std::cout << format_double(a.decay_rate) << ',' << format_double(a.final_reward_mean)
                  << ',' << format_double(a.final_reward_std) << ','
                  << format_double(a.reward_variance) << ',' << format_double(a.mean_epsilon)
                  << '\n';
      }
    } else if (calib->parsed()) {
      std::vector<std::string> extra;
      if (!budgets.empty()) extra.push_back("experiment.budgets=" + list_json(budgets));
      const ExperimentConfig config = resolve(calib_opts, extra);
      const CalibrationTable table = calibrate_waterfill(config, config.budgets);
      std::cout << "budget,sum_rate\n";
      for (const CalibrationRow& r : table.rows) {
        std::cout << format_double(r.budget) << ',' << format_double(r.sum_rate) << '\n';
      }
      std::cout << "closest to " << format_double(table.target) << ": "
                << format_double(table.best_budget) << " W\n";
    } else if (plots->parsed()) {
      const PlotFiles files = emit_plot_data(plots_dir);
      if (!files.training.empty()) std::cout << files.training.string() << '\n';
      if (!files.per_user.empty()) std::cout << files.per_user.string() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "powerlab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "powerlab: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
