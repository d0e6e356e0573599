#include "powerlab/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "powerlab/errors.hpp"

namespace powerlab {

void EnvParams::validate() const {
  if (n_users == 0) throw ConfigError("env: n_users must be positive");
  if (power_levels.empty()) throw ConfigError("env: power_levels must be non-empty");
  if (power_levels.front() != 0.0) throw ConfigError("env: first power level must be 0 W");
  for (std::size_t i = 1; i < power_levels.size(); ++i) {
    if (!(power_levels[i] > power_levels[i - 1])) {
      throw ConfigError("env: power_levels must be strictly increasing");
    }
  }
  if (!(noise_power > 0.0)) throw ConfigError("env: noise_power must be positive");
  if (!(h_min > 0.0) || !(h_min < h_max)) {
    throw ConfigError("env: channel bounds require 0 < h_min < h_max");
  }
  if (!(lambda_penalty >= 0.0)) throw ConfigError("env: lambda_penalty must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("env: gamma must lie in [0, 1)");
  if (!(arrival_rate >= 0.0)) throw ConfigError("env: arrival_rate must be >= 0");
  if (arrival_kind == ArrivalKind::Bernoulli && !(arrival_burst >= arrival_rate)) {
    throw ConfigError("env: arrival_burst must be >= arrival_rate for Bernoulli arrivals");
  }
}

ChannelState sample_channel(const EnvParams& params, Rng& rng) {
  if (!(params.h_min < params.h_max)) {
    throw ConfigError("sample_channel: h_min must be below h_max");
  }
  std::uniform_real_distribution<double> gain(params.h_min, params.h_max);
  ChannelState state;
  state.gains.resize(params.n_users);
  for (double& g : state.gains) g = gain(rng);
  return state;
}

double compute_snr(double power, double gain, double noise_power) {
  if (!(noise_power > 0.0)) throw ConfigError("compute_snr: noise_power must be positive");
  if (power < 0.0 || gain < 0.0) throw DomainError("compute_snr: power and gain must be >= 0");
  return power * gain / noise_power;
}

double compute_rate(double snr) {
  if (!(snr >= 0.0)) throw DomainError("compute_rate: snr must be >= 0");
  return std::log2(1.0 + snr);
}

double compute_reward(std::span<const double> rates, std::span<const double> powers,
                      double lambda_penalty) {
  if (rates.size() != powers.size()) {
    throw ContractViolation("compute_reward: rates and powers differ in length");
  }
  double sum_rate = 0.0;
  double sum_power = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    sum_rate += rates[i];
    sum_power += powers[i];
  }
  return sum_rate - lambda_penalty * sum_power;
}

QueueState update_queues(const QueueState& queues, std::span<const double> arrivals,
                         std::span<const double> rates) {
  const std::size_t n = queues.backlogs.size();
  if (arrivals.size() != n || rates.size() != n) {
    throw ContractViolation("update_queues: length mismatch");
  }
  QueueState next;
  next.backlogs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (arrivals[i] < 0.0 || rates[i] < 0.0) {
      throw ContractViolation("update_queues: arrivals and rates must be >= 0");
    }
    next.backlogs[i] = std::max(queues.backlogs[i] + arrivals[i] - rates[i], 0.0);
  }
  return next;
}

std::vector<double> action_powers(const ActionVector& action, const EnvParams& params) {
  if (action.levels.size() != params.n_users) {
    throw ContractViolation("action has " + std::to_string(action.levels.size()) +
                            " entries, expected " + std::to_string(params.n_users));
  }
  std::vector<double> powers(action.levels.size());
  for (std::size_t i = 0; i < powers.size(); ++i) {
    if (action.levels[i] >= params.num_levels()) {
      throw ContractViolation("action level index out of range");
    }
    powers[i] = params.power_levels[action.levels[i]];
  }
  return powers;
}

std::vector<double> draw_arrivals(const EnvParams& params, Rng& rng) {
  std::vector<double> arrivals(params.n_users, params.arrival_rate);
  if (params.arrival_kind == ArrivalKind::Bernoulli) {
    const double p = params.arrival_burst > 0.0 ? params.arrival_rate / params.arrival_burst : 0.0;
    std::bernoulli_distribution arrive(p);
    for (double& a : arrivals) a = arrive(rng) ? params.arrival_burst : 0.0;
  }
  return arrivals;
}

StepOutcome step_with_powers(const ChannelState& state, std::span<const double> powers,
                             const QueueState& queues, const EnvParams& params, Rng& rng) {
  const std::size_t n = params.n_users;
  if (state.gains.size() != n || powers.size() != n || queues.backlogs.size() != n) {
    throw ContractViolation("step: state, powers and queues must all have n_users entries");
  }
  StepOutcome out;
  out.rates.resize(n);
  out.powers_used.assign(powers.begin(), powers.end());
  for (std::size_t i = 0; i < n; ++i) {
    out.rates[i] = compute_rate(compute_snr(powers[i], state.gains[i], params.noise_power));
  }
  out.reward = compute_reward(out.rates, out.powers_used, params.lambda_penalty);
  out.next_state = sample_channel(params, rng);
  const std::vector<double> arrivals = draw_arrivals(params, rng);
  out.next_queues = update_queues(queues, arrivals, out.rates);
  return out;
}

StepOutcome step(const ChannelState& state, const ActionVector& action, const QueueState& queues,
                 const EnvParams& params, Rng& rng) {
  const std::vector<double> powers = action_powers(action, params);
  return step_with_powers(state, powers, queues, params, rng);
}

QueueState empty_queues(const EnvParams& params) {
  return QueueState{std::vector<double>(params.n_users, 0.0)};
}

}  // namespace powerlab
