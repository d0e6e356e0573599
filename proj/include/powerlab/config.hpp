#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "powerlab/dqn.hpp"
#include "powerlab/env.hpp"
#include "powerlab/metrics.hpp"
#include "powerlab/policies.hpp"

namespace powerlab {

struct ExperimentConfig {
  EnvParams env;
  TrainConfig train;
  WaterFillConfig waterfill;

  std::vector<PolicyKind> policies{PolicyKind::Fixed, PolicyKind::Random,
                                   PolicyKind::WaterFilling};
  std::uint64_t evaluation_steps = 1000000;  // per (baseline policy, seed)
  std::uint64_t greedy_eval_steps = 10000;   // per trained agent
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::filesystem::path output_directory = "results";
  FairnessMode fairness_mode = FairnessMode::PerStepAveraged;
  std::size_t jobs = 1;
  // Save a checkpoint every this many episodes; the final one is always saved.
  std::uint64_t checkpoint_interval = 0;
  std::vector<double> decay_rates{0.99, 0.98, 0.95, 0.90};
  std::vector<double> budgets{1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 9.0, 12.0};
  double calibration_target = 3.859;
  std::uint64_t calibration_draws = 200000;  // per (budget, seed)
  // Trained network evaluated as the "dqn" policy by `compare`.
  std::optional<std::filesystem::path> checkpoint;

  void validate() const;
};

// Missing keys keep their defaults; unknown keys raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
// Accepts a config file or a run manifest.
ExperimentConfig load_config(const std::filesystem::path& path);

// Applies "section.key=value" where value is JSON (bare words become strings).
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace powerlab
