#include "powerlab/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "powerlab/errors.hpp"
#include "powerlab/format.hpp"
#include "powerlab/policies.hpp"

namespace powerlab {

std::size_t joint_action_count(std::size_t n_users, std::size_t num_levels) {
  if (num_levels == 0) throw ContractViolation("joint_action_count: no power levels");
  std::size_t count = 1;
  for (std::size_t i = 0; i < n_users; ++i) {
    if (count > std::numeric_limits<std::size_t>::max() / num_levels) {
      throw ConfigError("joint action space overflows");
    }
    count *= num_levels;
  }
  return count;
}

std::size_t encode_action(const ActionVector& action, std::size_t num_levels) {
  std::size_t index = 0;
  for (std::size_t i = action.levels.size(); i-- > 0;) {
    if (action.levels[i] >= num_levels) {
      throw ContractViolation("encode_action: level " + std::to_string(action.levels[i]) +
                              " out of range");
    }
    index = index * num_levels + action.levels[i];
  }
  return index;
}

ActionVector decode_action(std::size_t index, std::size_t n_users, std::size_t num_levels) {
  if (index >= joint_action_count(n_users, num_levels)) {
    throw ContractViolation("decode_action: index out of range");
  }
  ActionVector action;
  action.levels.resize(n_users);
  for (auto& l : action.levels) {
    l = index % num_levels;
    index /= num_levels;
  }
  return action;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("ReplayBuffer: capacity must be positive");
  storage_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[write_cursor_] = std::move(t);
  }
  write_cursor_ = (write_cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= storage_.size()) throw ContractViolation("ReplayBuffer::at: index out of range");
  // Once full, the write cursor points at the oldest entry.
  const std::size_t oldest = storage_.size() < capacity_ ? 0 : write_cursor_;
  return storage_[(oldest + i) % storage_.size()];
}

std::optional<std::vector<Transition>> ReplayBuffer::sample(std::size_t batch_size,
                                                            Rng& rng) const {
  if (!ready(batch_size)) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(storage_[pick(rng)]);
  return batch;
}

EpsilonSchedule EpsilonSchedule::linear(double start, double end, std::uint64_t horizon_steps) {
  EpsilonSchedule s;
  s.kind = Kind::Linear;
  s.start = start;
  s.end = end;
  s.horizon_steps = horizon_steps;
  return s;
}

EpsilonSchedule EpsilonSchedule::exponential(double start, double floor, double decay_rate) {
  EpsilonSchedule s;
  s.kind = Kind::Exponential;
  s.start = start;
  s.end = floor;
  s.decay_rate = decay_rate;
  return s;
}

double EpsilonSchedule::value(std::uint64_t step, std::uint64_t episode) const {
  if (kind == Kind::Linear) {
    if (horizon_steps == 0 || step >= horizon_steps) return end;
    const double frac = static_cast<double>(step) / static_cast<double>(horizon_steps);
    return start + (end - start) * frac;
  }
  return std::max(end, start * std::pow(decay_rate, static_cast<double>(episode)));
}

void EpsilonSchedule::validate() const {
  if (!(start <= 1.0 && end >= 0.0 && start >= end)) {
    throw ConfigError("epsilon schedule requires 1 >= start >= end >= 0");
  }
  if (kind == Kind::Exponential && !(decay_rate > 0.0 && decay_rate < 1.0)) {
    throw ConfigError("epsilon decay_rate must lie in (0, 1)");
  }
}

std::uint64_t TrainConfig::num_episodes() const {
  return (total_steps + episode_length - 1) / episode_length;
}

double TrainConfig::learning_rate_at(std::uint64_t step) const {
  if (learning_rate_final == 0.0) return learning_rate;
  const double frac =
      std::min(1.0, static_cast<double>(step) / static_cast<double>(total_steps));
  return learning_rate + frac * (learning_rate_final - learning_rate);
}

void TrainConfig::validate() const {
  if (total_steps == 0) throw ConfigError("train: total_steps must be positive");
  if (episode_length == 0) throw ConfigError("train: episode_length must be positive");
  if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (replay_capacity == 0) throw ConfigError("train: replay_capacity must be positive");
  if (batch_size > replay_capacity) throw ConfigError("train: batch_size exceeds replay capacity");
  if (target_sync_period == 0) throw ConfigError("train: target_sync_period must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
  if (learning_rate_final < 0.0) throw ConfigError("train: learning_rate_final must be >= 0");
  if (grad_clip_norm < 0.0) throw ConfigError("train: grad_clip_norm must be >= 0");
  for (std::size_t h : hidden_layers) {
    if (h == 0) throw ConfigError("train: hidden layer widths must be positive");
  }
  schedule.validate();
}

std::vector<std::size_t> q_network_dims(const EnvParams& env, const TrainConfig& config) {
  std::vector<std::size_t> dims{env.n_users};
  dims.insert(dims.end(), config.hidden_layers.begin(), config.hidden_layers.end());
  dims.push_back(joint_action_count(env.n_users, env.num_levels()));
  return dims;
}

DqnAgent make_agent(const EnvParams& env, const TrainConfig& config, MlpNetwork online) {
  env.validate();
  config.validate();
  if (online.layer_dims() != q_network_dims(env, config)) {
    throw ConfigError("make_agent: network shape does not match the environment");
  }
  DqnAgent agent;
  agent.optimizer = AdamState::for_network(online);
  agent.target = copy_parameters(online);
  agent.online = std::move(online);
  agent.config = config;
  agent.env = env;
  return agent;
}

DqnAgent make_agent(const EnvParams& env, const TrainConfig& config) {
  Rng init = make_stream(config.seed, Stream::Init);
  return make_agent(env, config, init_network(q_network_dims(env, config), init));
}

std::size_t greedy_action(const MlpNetwork& net, const ChannelState& state) {
  const std::vector<double> q = forward(net, state.gains);
  // max_element returns the first maximum.
  return static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
}

std::size_t select_action(const DqnAgent& agent, const ChannelState& state, double epsilon,
                          Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> any(0, agent.num_actions() - 1);
    return any(rng);
  }
  return greedy_action(agent.online, state);
}

void push_transition(ReplayBuffer& buffer, Transition t) { buffer.push(std::move(t)); }

std::optional<std::vector<Transition>> sample_batch(const ReplayBuffer& buffer,
                                                    std::size_t batch_size, Rng& rng) {
  return buffer.sample(batch_size, rng);
}

namespace {

std::vector<double> stack_states(const std::vector<Transition>& batch, bool next) {
  std::vector<double> out;
  out.reserve(batch.size() * batch.front().state.gains.size());
  for (const Transition& t : batch) {
    const auto& g = next ? t.next_state.gains : t.state.gains;
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

}  // namespace

std::vector<double> td_targets(const std::vector<Transition>& batch, const MlpNetwork& target_net,
                               double gamma) {
  if (batch.empty()) return {};
  const ForwardCache cache = forward_batch(target_net, stack_states(batch, true), batch.size());
  std::vector<double> y(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto q = cache.output_row(b);
    y[b] = batch[b].reward + gamma * *std::max_element(q.begin(), q.end());
  }
  return y;
}

BatchGradient batch_gradient(const MlpNetwork& online, const MlpNetwork& target_net,
                             const std::vector<Transition>& batch, double gamma) {
  if (batch.empty()) throw ContractViolation("batch_gradient: empty batch");
  const std::size_t n = batch.size();
  const std::size_t actions = online.output_size();
  const std::vector<double> targets = td_targets(batch, target_net, gamma);
  const ForwardCache cache = forward_batch(online, stack_states(batch, false), n);

  BatchGradient out;
  out.output_grad.assign(n * actions, 0.0);
  double sum_sq = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const std::size_t a = batch[b].action_index;
    if (a >= actions) throw ContractViolation("batch_gradient: action index out of range");
    const double diff = cache.output_row(b)[a] - targets[b];
    sum_sq += diff * diff;
    out.output_grad[b * actions + a] = 2.0 * diff / static_cast<double>(n);
  }
  out.loss = sum_sq / static_cast<double>(n);
  out.grads = GradientSet::zeros_like(online);
  backward_batch(online, cache, out.output_grad, out.grads);
  return out;
}

double learn_on_batch(DqnAgent& agent, const std::vector<Transition>& batch) {
  BatchGradient g = batch_gradient(agent.online, agent.target, batch, agent.env.gamma);
  if (!std::isfinite(g.loss)) {
    throw TrainingError("learn_step: non-finite loss at agent step " +
                        std::to_string(agent.step_counter));
  }
  if (agent.config.grad_clip_norm > 0.0) clip_gradient_norm(g.grads, agent.config.grad_clip_norm);
  adam_step(agent.online, g.grads, agent.optimizer,
            agent.config.learning_rate_at(agent.step_counter));
  return g.loss;
}

std::optional<double> learn_step(DqnAgent& agent, const ReplayBuffer& buffer, Rng& rng) {
  auto batch = buffer.sample(agent.config.batch_size, rng);
  if (!batch) return std::nullopt;
  return learn_on_batch(agent, *batch);
}

void sync_target(DqnAgent& agent) { agent.target = copy_parameters(agent.online); }

TrainingLog train(DqnAgent& agent, const TrainCallbacks& callbacks, FairnessMode fairness_mode) {
  const EnvParams& env = agent.env;
  const TrainConfig& cfg = agent.config;
  env.validate();
  cfg.validate();

  Rng channel = make_stream(cfg.seed, Stream::Channel);
  Rng exploration = make_stream(cfg.seed, Stream::Exploration);
  Rng replay_rng = make_stream(cfg.seed, Stream::Replay);

  ReplayBuffer buffer(cfg.replay_capacity);
  const std::size_t learn_threshold =
      std::max<std::size_t>(cfg.batch_size, static_cast<std::size_t>(cfg.warmup_steps));
  const std::size_t levels = env.num_levels();

  TrainingLog log;
  ChannelState state = sample_channel(env, channel);
  QueueState queues = empty_queues(env);
  std::uint64_t global_step = 0;

  for (std::uint64_t episode = 0; global_step < cfg.total_steps; ++episode) {
    TrajectoryRecord traj(env.n_users);
    traj.reserve(cfg.episode_length);
    EpisodeLog entry;
    entry.episode = episode;
    entry.epsilon = cfg.schedule.value(global_step, episode);
    double loss_sum = 0.0;
    std::uint64_t loss_count = 0;

    try {
      for (std::uint64_t t = 0; t < cfg.episode_length && global_step < cfg.total_steps;
           ++t, ++global_step) {
        const double epsilon = cfg.schedule.value(global_step, episode);
        const std::size_t a = select_action(agent, state, epsilon, exploration);
        StepOutcome out = step(state, decode_action(a, env.n_users, levels), queues, env, channel);
        entry.cumulative_reward += out.reward;
        traj.record(out.rates, out.powers_used, out.next_queues.backlogs);
        push_transition(buffer, Transition{state, a, out.reward, out.next_state});

        if (buffer.size() >= learn_threshold) {
          if (auto loss = learn_step(agent, buffer, replay_rng)) {
            loss_sum += *loss;
            ++loss_count;
            ++log.learn_steps;
          }
        }
        ++agent.step_counter;
        if (agent.step_counter % cfg.target_sync_period == 0) {
          sync_target(agent);
          log.sync_steps.push_back(agent.step_counter);
        }
        state = std::move(out.next_state);
        queues = std::move(out.next_queues);
      }
    } catch (const TrainingError& e) {
      throw TrainingError(std::string(e.what()) + " (episode " + std::to_string(episode) + ")");
    }

    if (loss_count > 0) entry.mean_loss = loss_sum / static_cast<double>(loss_count);
    const MetricsReport report = build_report(traj, fairness_mode);
    entry.sum_rate = report.throughput;
    entry.fairness = report.fairness;
    entry.energy_efficiency = report.energy_efficiency;
    entry.mean_latency = report.mean_latency;
    if (!std::isfinite(entry.cumulative_reward)) {
      throw TrainingError("train: non-finite episode reward (episode " + std::to_string(episode) +
                          ")");
    }
    log.episodes.push_back(entry);
    if (callbacks.on_episode_end) callbacks.on_episode_end(entry, agent);
  }
  return log;
}

void write_training_csv(const TrainingLog& log, std::ostream& out) {
  out << "episode,cumulative_reward,mean_loss,epsilon,sum_rate,fairness,energy_efficiency,"
         "mean_latency\n";
  for (const EpisodeLog& e : log.episodes) {
    out << e.episode << ',' << format_double(e.cumulative_reward) << ','
        << format_optional(e.mean_loss) << ',' << format_double(e.epsilon) << ','
        << format_double(e.sum_rate) << ',' << format_optional(e.fairness) << ','
        << format_optional(e.energy_efficiency) << ',' << format_double(e.mean_latency) << '\n';
  }
}

MetricsReport evaluate_greedy(const DqnAgent& agent, std::size_t steps, Rng& rng,
                              FairnessMode fairness_mode) {
  if (steps == 0) throw ContractViolation("evaluate_greedy: steps must be positive");
  const EnvParams& env = agent.env;
  TrajectoryRecord traj(env.n_users);
  traj.reserve(steps);
  ChannelState state = sample_channel(env, rng);
  QueueState queues = empty_queues(env);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t a = greedy_action(agent.online, state);
    StepOutcome out = step(state, decode_action(a, env.n_users, env.num_levels()), queues, env, rng);
    traj.record(out.rates, out.powers_used, out.next_queues.backlogs);
    state = std::move(out.next_state);
    queues = std::move(out.next_queues);
  }
  return build_report(traj, fairness_mode);
}

OracleComparison compare_with_oracle(const DqnAgent& agent, std::size_t states, Rng& rng) {
  if (states == 0) throw ContractViolation("compare_with_oracle: states must be positive");
  const EnvParams& env = agent.env;
  OracleComparison out;
  out.states = states;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < states; ++i) {
    const ChannelState s = sample_channel(env, rng);
    const ActionVector greedy =
        decode_action(greedy_action(agent.online, s), env.n_users, env.num_levels());
    const ActionVector oracle = myopic_oracle(s, env);
    const auto one_step = [&](const ActionVector& a, double* sum_rate) {
      const std::vector<double> p = action_powers(a, env);
      std::vector<double> r(p.size());
      for (std::size_t u = 0; u < p.size(); ++u) {
        r[u] = compute_rate(compute_snr(p[u], s.gains[u], env.noise_power));
        if (sum_rate != nullptr) *sum_rate += r[u];
      }
      return compute_reward(r, p, env.lambda_penalty);
    };
    out.greedy_mean_reward += one_step(greedy, &out.greedy_mean_sum_rate);
    out.oracle_mean_reward += one_step(oracle, nullptr);
    if (greedy.levels == oracle.levels) ++agree;
  }
  const double n = static_cast<double>(states);
  out.greedy_mean_reward /= n;
  out.oracle_mean_reward /= n;
  out.greedy_mean_sum_rate /= n;
  out.action_agreement = static_cast<double>(agree) / n;
  return out;
}

}  // namespace powerlab
