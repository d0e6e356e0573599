#include "powerlab/metrics.hpp"

#include <cmath>
#include <string>

#include "powerlab/errors.hpp"

namespace powerlab {

void TrajectoryRecord::record(std::span<const double> rates, std::span<const double> powers,
                              std::span<const double> queues) {
  if (rates.size() != n_users_ || powers.size() != n_users_ || queues.size() != n_users_) {
    throw ContractViolation("TrajectoryRecord: step does not have n_users entries");
  }
  rates_.insert(rates_.end(), rates.begin(), rates.end());
  powers_.insert(powers_.end(), powers.begin(), powers.end());
  queues_.insert(queues_.end(), queues.begin(), queues.end());
}

void TrajectoryRecord::reserve(std::size_t steps) {
  rates_.reserve(steps * n_users_);
  powers_.reserve(steps * n_users_);
  queues_.reserve(steps * n_users_);
}

std::span<const double> TrajectoryRecord::rates(std::size_t t) const {
  return std::span<const double>(rates_).subspan(t * n_users_, n_users_);
}
std::span<const double> TrajectoryRecord::powers(std::size_t t) const {
  return std::span<const double>(powers_).subspan(t * n_users_, n_users_);
}
std::span<const double> TrajectoryRecord::queues(std::size_t t) const {
  return std::span<const double>(queues_).subspan(t * n_users_, n_users_);
}

std::string_view fairness_mode_name(FairnessMode mode) {
  return mode == FairnessMode::OnAverages ? "on_averages" : "per_step_averaged";
}

FairnessMode parse_fairness_mode(std::string_view name) {
  if (name == "on_averages") return FairnessMode::OnAverages;
  if (name == "per_step_averaged") return FairnessMode::PerStepAveraged;
  throw ConfigError("unknown fairness mode: " + std::string(name));
}

namespace {

void require_steps(const TrajectoryRecord& traj) {
  if (traj.steps() == 0) throw ContractViolation("metrics: empty trajectory");
}

}  // namespace

double throughput(const TrajectoryRecord& traj) {
  require_steps(traj);
  double total = 0.0;
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    for (double r : traj.rates(t)) total += r;
  }
  return total / static_cast<double>(traj.steps());
}

std::optional<double> jain_index(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("jain_index: empty input");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : values) {
    if (v < 0.0) throw ContractViolation("jain_index: values must be non-negative");
    sum += v;
    sum_sq += v * v;
  }
  if (sum_sq == 0.0) return std::nullopt;
  return sum * sum / (static_cast<double>(values.size()) * sum_sq);
}

std::optional<double> energy_efficiency(const TrajectoryRecord& traj) {
  require_steps(traj);
  double bits = 0.0;
  double energy = 0.0;
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    for (double r : traj.rates(t)) bits += r;
    for (double p : traj.powers(t)) energy += p;
  }
  if (energy == 0.0) return std::nullopt;
  return bits / energy;
}

LatencySummary mean_latency(const TrajectoryRecord& traj) {
  require_steps(traj);
  const std::size_t n = traj.n_users();
  LatencySummary out;
  out.per_user.assign(n, 0.0);
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    const auto q = traj.queues(t);
    for (std::size_t i = 0; i < n; ++i) out.per_user[i] += q[i];
  }
  double total = 0.0;
  for (double& u : out.per_user) {
    total += u;
    u /= static_cast<double>(traj.steps());
  }
  out.mean = total / static_cast<double>(n * traj.steps());
  return out;
}

MetricsReport build_report(const TrajectoryRecord& traj, FairnessMode mode) {
  require_steps(traj);
  const std::size_t n = traj.n_users();
  const double steps = static_cast<double>(traj.steps());

  MetricsReport report;
  report.steps = traj.steps();
  report.fairness_mode = mode;
  report.throughput = throughput(traj);
  report.energy_efficiency = energy_efficiency(traj);

  report.per_user_rate.assign(n, 0.0);
  double jain_sum = 0.0;
  std::size_t jain_count = 0;
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    const auto r = traj.rates(t);
    for (std::size_t i = 0; i < n; ++i) report.per_user_rate[i] += r[i];
    if (mode == FairnessMode::PerStepAveraged) {
      // Slots where nobody is served have no defined index and are skipped.
      if (const auto j = jain_index(r)) {
        jain_sum += *j;
        ++jain_count;
      }
    }
  }
  for (double& r : report.per_user_rate) r /= steps;

  if (mode == FairnessMode::OnAverages) {
    report.fairness = jain_index(report.per_user_rate);
  } else if (jain_count > 0) {
    report.fairness = jain_sum / static_cast<double>(jain_count);
  }

  LatencySummary latency = mean_latency(traj);
  report.mean_latency = latency.mean;
  report.per_user_delay_ratio.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (report.per_user_rate[i] > 0.0) {
      report.per_user_delay_ratio[i] = latency.per_user[i] / report.per_user_rate[i];
    }
  }
  report.per_user_latency = std::move(latency.per_user);
  return report;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json ratios = nlohmann::json::array();
  for (const auto& r : report.per_user_delay_ratio) ratios.push_back(optional_json(r));
  return nlohmann::json{
      {"throughput", report.throughput},
      {"fairness", optional_json(report.fairness)},
      {"energy_efficiency", optional_json(report.energy_efficiency)},
      {"mean_latency", report.mean_latency},
      {"per_user_rate", report.per_user_rate},
      {"per_user_latency", report.per_user_latency},
      {"per_user_delay_ratio", ratios},
      {"fairness_mode", fairness_mode_name(report.fairness_mode)},
      {"steps", report.steps},
  };
}

MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.throughput = j.at("throughput").get<double>();
  r.fairness = optional_from(j.at("fairness"));
  r.energy_efficiency = optional_from(j.at("energy_efficiency"));
  r.mean_latency = j.at("mean_latency").get<double>();
  r.per_user_rate = j.at("per_user_rate").get<std::vector<double>>();
  r.per_user_latency = j.at("per_user_latency").get<std::vector<double>>();
  for (const auto& v : j.at("per_user_delay_ratio")) r.per_user_delay_ratio.push_back(optional_from(v));
  r.fairness_mode = parse_fairness_mode(j.at("fairness_mode").get<std::string>());
  r.steps = j.at("steps").get<std::size_t>();
  return r;
}

}  // namespace powerlab
