#pragma once

// Deep Q-Network agent over the flat joint action space of size M^N.
//
// The environment is continuing (no terminal states), so TD targets never
// mask the bootstrap term; "episodes" are fixed-length windows that exist for
// logging and for the per-episode exploration schedule.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "powerlab/env.hpp"
#include "powerlab/metrics.hpp"
#include "powerlab/neural.hpp"
#include "powerlab/rng.hpp"

namespace powerlab {

std::size_t joint_action_count(std::size_t n_users, std::size_t num_levels);
// Base-M word with user 0 as the least significant digit.
std::size_t encode_action(const ActionVector& action, std::size_t num_levels);
ActionVector decode_action(std::size_t index, std::size_t n_users, std::size_t num_levels);

struct Transition {
  ChannelState state;
  std::size_t action_index = 0;
  double reward = 0.0;
  ChannelState next_state;
};

// Fixed-capacity FIFO ring of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool ready(std::size_t batch_size) const { return batch_size > 0 && size() >= batch_size; }
  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;

  // Uniform draws with replacement; nullopt while fewer than batch_size
  // transitions are stored.
  std::optional<std::vector<Transition>> sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t write_cursor_ = 0;
  std::vector<Transition> storage_;
};

struct EpsilonSchedule {
  enum class Kind { Linear, Exponential };

  Kind kind = Kind::Linear;
  double start = 1.0;
  double end = 0.05;  // final value (linear) or floor (exponential)
  std::uint64_t horizon_steps = 20000;
  double decay_rate = 0.95;  // per episode, exponential only

  static EpsilonSchedule linear(double start, double end, std::uint64_t horizon_steps);
  static EpsilonSchedule exponential(double start, double floor, double decay_rate);

  // Linear schedules read the global step, exponential ones the episode index.
  double value(std::uint64_t step, std::uint64_t episode) const;
  void validate() const;
};

struct TrainConfig {
  std::uint64_t total_steps = 100000;
  std::uint64_t episode_length = 200;
  std::size_t batch_size = 32;
  std::uint64_t target_sync_period = 100;
  // Adam step size, annealed linearly to learning_rate_final over total_steps
  // (0 keeps it constant). Q-values sit near r/(1-gamma) ~ 300 while action
  // gaps are ~0.3, so late updates must be small to resolve them.
  double learning_rate = 1e-4;
  double learning_rate_final = 1e-6;
  // Learning starts once the buffer holds max(batch_size, warmup_steps) items.
  std::uint64_t warmup_steps = 0;
  std::size_t replay_capacity = 10000;
  std::vector<std::size_t> hidden_layers{64, 128};
  // Max L2 norm of the gradient; 0 disables clipping.
  double grad_clip_norm = 0.0;
  std::uint64_t seed = 0;
  EpsilonSchedule schedule;

  std::uint64_t num_episodes() const;
  double learning_rate_at(std::uint64_t step) const;
  void validate() const;
};

struct DqnAgent {
  MlpNetwork online;
  MlpNetwork target;
  AdamState optimizer;
  TrainConfig config;
  EnvParams env;
  std::uint64_t step_counter = 0;

  std::size_t num_actions() const { return online.output_size(); }
};

std::vector<std::size_t> q_network_dims(const EnvParams& env, const TrainConfig& config);

// Fresh agent; weights come from the Init stream of config.seed.
DqnAgent make_agent(const EnvParams& env, const TrainConfig& config);
// Agent around existing online weights (e.g. a loaded checkpoint).
DqnAgent make_agent(const EnvParams& env, const TrainConfig& config, MlpNetwork online);

// Argmax of the online Q-values; ties go to the lowest index.
std::size_t greedy_action(const MlpNetwork& net, const ChannelState& state);
std::size_t select_action(const DqnAgent& agent, const ChannelState& state, double epsilon,
                          Rng& rng);

void push_transition(ReplayBuffer& buffer, Transition t);
std::optional<std::vector<Transition>> sample_batch(const ReplayBuffer& buffer,
                                                    std::size_t batch_size, Rng& rng);

// y = r + gamma * max_a' Q_target(s', a') for every transition.
std::vector<double> td_targets(const std::vector<Transition>& batch, const MlpNetwork& target_net,
                               double gamma);

struct BatchGradient {
  double loss = 0.0;
  // dLoss/dQ for every (sample, action); zero except at the taken actions.
  std::vector<double> output_grad;
  GradientSet grads;
};

// MSE between Q_online(s, a) at the taken actions and the TD targets.
BatchGradient batch_gradient(const MlpNetwork& online, const MlpNetwork& target_net,
                             const std::vector<Transition>& batch, double gamma);

// One optimizer step on a given batch; returns the pre-update loss.
double learn_on_batch(DqnAgent& agent, const std::vector<Transition>& batch);
// Samples a batch and learns on it; nullopt when the buffer is not ready.
std::optional<double> learn_step(DqnAgent& agent, const ReplayBuffer& buffer, Rng& rng);

void sync_target(DqnAgent& agent);

struct EpisodeLog {
  std::uint64_t episode = 0;
  double cumulative_reward = 0.0;
  std::optional<double> mean_loss;  // missing until learning starts
  double epsilon = 0.0;             // value at the first step of the episode
  double sum_rate = 0.0;
  std::optional<double> fairness;
  std::optional<double> energy_efficiency;
  double mean_latency = 0.0;
};

struct TrainingLog {
  std::vector<EpisodeLog> episodes;
  std::vector<std::uint64_t> sync_steps;
  std::uint64_t learn_steps = 0;
};

struct TrainCallbacks {
  std::function<void(const EpisodeLog&, const DqnAgent&)> on_episode_end;
};

TrainingLog train(DqnAgent& agent, const TrainCallbacks& callbacks = {},
                  FairnessMode fairness_mode = FairnessMode::PerStepAveraged);

void write_training_csv(const TrainingLog& log, std::ostream& out);

// Runs the epsilon = 0 policy for `steps` slots without learning.
MetricsReport evaluate_greedy(const DqnAgent& agent, std::size_t steps, Rng& rng,
                              FairnessMode fairness_mode = FairnessMode::PerStepAveraged);

struct OracleComparison {
  double greedy_mean_reward = 0.0;
  double oracle_mean_reward = 0.0;
  double greedy_mean_sum_rate = 0.0;
  double action_agreement = 0.0;  // fraction of states with identical joint actions
  std::size_t states = 0;
};

// One-step rewards of the greedy and myopic-oracle actions on fresh states.
OracleComparison compare_with_oracle(const DqnAgent& agent, std::size_t states, Rng& rng);

}  // namespace powerlab
