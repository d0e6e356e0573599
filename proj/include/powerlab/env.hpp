#pragma once

// Multi-user downlink with orthogonal access and i.i.d. block fading.
//
// The MDP state is the vector of instantaneous channel gains. Each slot the
// controller picks one discrete transmit power per user, every user receives
// log2(1 + p*h/noise) bits/s/Hz, and the reward is the sum-rate minus a linear
// power penalty. The next state is drawn afresh, independent of the action.
// Per-user queues are tracked alongside for latency metrics only; they are
// never part of the observation.

#include <cstddef>
#include <span>
#include <vector>

#include "powerlab/rng.hpp"

namespace powerlab {

enum class ArrivalKind { Constant, Bernoulli };

struct EnvParams {
  std::size_t n_users = 3;
  std::vector<double> power_levels{0.0, 1.0, 2.0, 3.0};  // Watts
  double noise_power = 1.0;
  double h_min = 0.1;
  double h_max = 1.0;
  double lambda_penalty = 0.1;
  double gamma = 0.99;
  // Mean arrivals in bits/slot/user. Bernoulli mode delivers `arrival_burst`
  // bits with probability arrival_rate / arrival_burst.
  double arrival_rate = 0.8;
  ArrivalKind arrival_kind = ArrivalKind::Constant;
  double arrival_burst = 2.0;

  std::size_t num_levels() const { return power_levels.size(); }
  // Throws ConfigError when an invariant does not hold.
  void validate() const;
};

struct ChannelState {
  std::vector<double> gains;
};

struct ActionVector {
  std::vector<std::size_t> levels;
};

struct QueueState {
  std::vector<double> backlogs;
};

struct StepOutcome {
  std::vector<double> rates;
  double reward = 0.0;
  ChannelState next_state;
  std::vector<double> powers_used;
  QueueState next_queues;
};

ChannelState sample_channel(const EnvParams& params, Rng& rng);

double compute_snr(double power, double gain, double noise_power);
double compute_rate(double snr);
double compute_reward(std::span<const double> rates, std::span<const double> powers,
                      double lambda_penalty);
QueueState update_queues(const QueueState& queues, std::span<const double> arrivals,
                         std::span<const double> rates);

// Power in Watts for each user's selected level.
std::vector<double> action_powers(const ActionVector& action, const EnvParams& params);

// One slot of arrivals according to params.arrival_kind.
std::vector<double> draw_arrivals(const EnvParams& params, Rng& rng);

StepOutcome step(const ChannelState& state, const ActionVector& action, const QueueState& queues,
                 const EnvParams& params, Rng& rng);

// Same transition with arbitrary non-negative continuous powers (used by the
// water-filling baseline, which is not restricted to the discrete levels).
StepOutcome step_with_powers(const ChannelState& state, std::span<const double> powers,
                             const QueueState& queues, const EnvParams& params, Rng& rng);

QueueState empty_queues(const EnvParams& params);

}  // namespace powerlab
