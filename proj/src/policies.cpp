#include "powerlab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "powerlab/errors.hpp"

namespace powerlab {

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Fixed:
      return "fixed";
    case PolicyKind::Random:
      return "random";
    case PolicyKind::WaterFilling:
      return "waterfilling";
    case PolicyKind::MyopicOracle:
      return "oracle";
    case PolicyKind::LearnedGreedy:
      return "dqn";
  }
  return "unknown";
}

PolicyKind parse_policy(std::string_view name) {
  for (PolicyKind k : {PolicyKind::Fixed, PolicyKind::Random, PolicyKind::WaterFilling,
                       PolicyKind::MyopicOracle, PolicyKind::LearnedGreedy}) {
    if (policy_name(k) == name) return k;
  }
  throw ConfigError("unknown policy: " + std::string(name));
}

double WaterFillConfig::budget_for(std::size_t n_users) const {
  return total_power > 0.0 ? total_power : 2.0 * static_cast<double>(n_users);
}

void WaterFillConfig::validate() const {
  if (total_power < 0.0) throw ConfigError("waterfill: total_power must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("waterfill: tolerance must be positive");
  if (max_iterations == 0) throw ConfigError("waterfill: max_iterations must be positive");
}

std::size_t nearest_level(const EnvParams& params, double watts) {
  std::size_t best = 0;
  double best_gap = std::abs(params.power_levels[0] - watts);
  for (std::size_t i = 1; i < params.power_levels.size(); ++i) {
    const double gap = std::abs(params.power_levels[i] - watts);
    if (gap < best_gap) {
      best = i;
      best_gap = gap;
    }
  }
  return best;
}

ActionVector fixed_policy(const ChannelState& /*state*/, const EnvParams& params, double watts) {
  return ActionVector{std::vector<std::size_t>(params.n_users, nearest_level(params, watts))};
}

ActionVector random_policy(const ChannelState& /*state*/, const EnvParams& params, Rng& rng) {
  std::uniform_int_distribution<std::size_t> level(0, params.num_levels() - 1);
  ActionVector action;
  action.levels.resize(params.n_users);
  for (auto& l : action.levels) l = level(rng);
  return action;
}

namespace {

double allocated(std::span<const double> floors, double level, std::vector<double>* powers) {
  double sum = 0.0;
  for (std::size_t i = 0; i < floors.size(); ++i) {
    const double p = std::max(level - floors[i], 0.0);
    if (powers != nullptr) (*powers)[i] = p;
    sum += p;
  }
  return sum;
}

}  // namespace

WaterFillResult waterfill_allocate(const ChannelState& state, double noise_power,
                                   double total_power, const WaterFillConfig& config) {
  if (!(noise_power > 0.0)) throw ConfigError("waterfill: noise_power must be positive");
  if (!(total_power >= 0.0)) throw ConfigError("waterfill: total_power must be >= 0");
  if (state.gains.empty()) throw ContractViolation("waterfill: empty state");

  // floors[i] = noise / h_i, the "ground height" under user i.
  std::vector<double> floors(state.gains.size());
  for (std::size_t i = 0; i < floors.size(); ++i) {
    if (!(state.gains[i] > 0.0)) throw DomainError("waterfill: channel gains must be positive");
    floors[i] = noise_power / state.gains[i];
  }
  const auto [min_floor, max_floor] = std::minmax_element(floors.begin(), floors.end());

  WaterFillResult result;
  result.powers.assign(floors.size(), 0.0);
  double lo = *min_floor;
  double hi = *max_floor + total_power;
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double residual = allocated(floors, mid, &result.powers) - total_power;
    result.water_level = mid;
    result.residual = residual;
    result.iterations = it;
    if (std::abs(residual) <= config.tolerance) return result;
    if (residual > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  throw SolverError("waterfill: bisection did not converge, residual " +
                        std::to_string(result.residual),
                    result.residual);
}

WaterFillDecision waterfill_policy(const ChannelState& state, const EnvParams& params,
                                   const WaterFillConfig& config) {
  WaterFillResult wf =
      waterfill_allocate(state, params.noise_power, config.budget_for(params.n_users), config);
  WaterFillDecision decision;
  decision.water_level = wf.water_level;
  decision.discrete.levels.resize(wf.powers.size());
  for (std::size_t i = 0; i < wf.powers.size(); ++i) {
    // Largest level not exceeding the continuous power.
    const auto& lv = params.power_levels;
    const auto it = std::upper_bound(lv.begin(), lv.end(), wf.powers[i]);
    decision.discrete.levels[i] = it == lv.begin() ? 0 : static_cast<std::size_t>(it - lv.begin()) - 1;
  }
  decision.powers = std::move(wf.powers);
  return decision;
}

ActionVector myopic_oracle(const ChannelState& state, const EnvParams& params) {
  if (state.gains.size() != params.n_users) {
    throw ContractViolation("myopic_oracle: state size does not match n_users");
  }
  ActionVector action;
  action.levels.resize(params.n_users);
  for (std::size_t u = 0; u < params.n_users; ++u) {
    double best_value = 0.0;
    std::size_t best = 0;
    for (std::size_t l = 0; l < params.num_levels(); ++l) {
      const double p = params.power_levels[l];
      const double value =
          compute_rate(compute_snr(p, state.gains[u], params.noise_power)) -
          params.lambda_penalty * p;
      // Strict improvement only: ties stay on the lower power level.
      if (l == 0 || value > best_value) {
        best_value = value;
        best = l;
      }
    }
    action.levels[u] = best;
  }
  return action;
}

}  // namespace powerlab
