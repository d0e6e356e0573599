#pragma once

// Experiment runner behind the command-line tool. Every entry point writes
// CSV/JSON artifacts under config.output_directory and is a pure function of
// the configuration: re-running with the same config yields identical files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "powerlab/config.hpp"
#include "powerlab/dqn.hpp"
#include "powerlab/metrics.hpp"
#include "powerlab/policies.hpp"

namespace powerlab {

inline constexpr const char* kCodeVersion = "powerlab 1.0.0";

// Simulates one policy for `steps` slots on the channel realization of
// `seed`. LearnedGreedy needs `agent`.
MetricsReport simulate_policy(PolicyKind policy, const ExperimentConfig& config,
                              std::uint64_t steps, std::uint64_t seed,
                              const DqnAgent* agent = nullptr);

// Field-wise mean over seeds; missing optional metrics are averaged over the
// seeds that define them.
MetricsReport average_reports(const std::vector<MetricsReport>& reports);

struct PolicyRow {
  PolicyKind policy = PolicyKind::Fixed;
  MetricsReport mean;
  std::vector<MetricsReport> per_seed;
};

struct ComparisonTable {
  std::vector<PolicyRow> rows;
  const PolicyRow* find(PolicyKind policy) const;
};

ComparisonTable run_comparison(const ExperimentConfig& config);

struct SeedResult {
  std::uint64_t seed = 0;
  TrainingLog log;
  MetricsReport greedy;
  OracleComparison oracle;
};

struct RunArtifacts {
  std::vector<std::filesystem::path> training_logs;
  std::vector<std::filesystem::path> metrics;
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path comparison_table;
  std::filesystem::path manifest;
  std::vector<SeedResult> results;
};

RunArtifacts run_training(const ExperimentConfig& config);

struct AblationArm {
  double decay_rate = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<TrainingLog> logs;
  double final_reward_mean = 0.0;  // mean over seeds of the last-10% episode reward
  double final_reward_std = 0.0;   // sample standard deviation over seeds
  double reward_variance = 0.0;    // mean over seeds of the per-run episode-reward variance
  double mean_epsilon = 0.0;
  std::optional<std::uint64_t> floor_episode;  // first episode at the epsilon floor
};

struct AblationReport {
  std::vector<AblationArm> arms;
};

AblationReport run_ablation(const ExperimentConfig& config, const std::vector<double>& decay_rates);

struct CalibrationRow {
  double budget = 0.0;
  double sum_rate = 0.0;
  std::optional<double> energy_efficiency;
  std::optional<double> fairness;
};

struct CalibrationTable {
  std::vector<CalibrationRow> rows;
  double target = 0.0;
  double best_budget = 0.0;
};

CalibrationTable calibrate_waterfill(const ExperimentConfig& config,
                                     const std::vector<double>& budgets);

struct PlotFiles {
  std::filesystem::path training;
  std::filesystem::path per_user;
};

// Tidy CSVs built from the artifacts already in `directory`.
PlotFiles emit_plot_data(const std::filesystem::path& directory);

// Mean of the first/last `fraction` of episode rewards.
double leading_mean_reward(const TrainingLog& log, double fraction);
double trailing_mean_reward(const TrainingLog& log, double fraction);

nlohmann::json manifest_json(const ExperimentConfig& config, const char* command);

}  // namespace powerlab
