#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "powerlab/env.hpp"
#include "powerlab/rng.hpp"

namespace powerlab {

enum class PolicyKind { Fixed, Random, WaterFilling, MyopicOracle, LearnedGreedy };

// Config names: "fixed", "random", "waterfilling", "oracle", "dqn".
std::string_view policy_name(PolicyKind kind);
PolicyKind parse_policy(std::string_view name);

struct WaterFillConfig {
  // Budget on the sum of powers. Zero means "2 W per user".
  double total_power = 0.0;
  double tolerance = 1e-10;
  std::size_t max_iterations = 200;

  double budget_for(std::size_t n_users) const;
  void validate() const;
};

struct WaterFillResult {
  std::vector<double> powers;
  double water_level = 0.0;
  double residual = 0.0;  // sum(powers) - budget
  std::size_t iterations = 0;
};

struct WaterFillDecision {
  std::vector<double> powers;  // continuous, used for rates and energy
  ActionVector discrete;       // each power floored onto power_levels
  double water_level = 0.0;
};

// Level index whose power is closest to `watts`, ties toward the lower level.
std::size_t nearest_level(const EnvParams& params, double watts);

ActionVector fixed_policy(const ChannelState& state, const EnvParams& params,
                          double watts = 2.0);

ActionVector random_policy(const ChannelState& state, const EnvParams& params, Rng& rng);

// p_i = max(mu - noise/h_i, 0) with the water level mu found by bisection so
// that sum(p) matches the budget within config.tolerance.
WaterFillResult waterfill_allocate(const ChannelState& state, double noise_power,
                                   double total_power, const WaterFillConfig& config);

WaterFillDecision waterfill_policy(const ChannelState& state, const EnvParams& params,
                                   const WaterFillConfig& config);

// Per-user argmax of log2(1 + p h / noise) - lambda p over the discrete levels.
// The reward is separable and the transition ignores the action, so this
// greedy choice is optimal for the discounted problem as well.
ActionVector myopic_oracle(const ChannelState& state, const EnvParams& params);

}  // namespace powerlab
