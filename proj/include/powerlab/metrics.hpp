#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace powerlab {

// Per-step rates, powers and end-of-slot queue backlogs, row-major (T x N).
class TrajectoryRecord {
 public:
  explicit TrajectoryRecord(std::size_t n_users) : n_users_(n_users) {}

  void record(std::span<const double> rates, std::span<const double> powers,
              std::span<const double> queues);
  void reserve(std::size_t steps);

  std::size_t n_users() const { return n_users_; }
  std::size_t steps() const { return n_users_ == 0 ? 0 : rates_.size() / n_users_; }
  std::span<const double> rates(std::size_t t) const;
  std::span<const double> powers(std::size_t t) const;
  std::span<const double> queues(std::size_t t) const;

 private:
  std::size_t n_users_;
  std::vector<double> rates_;
  std::vector<double> powers_;
  std::vector<double> queues_;
};

enum class FairnessMode {
  OnAverages,       // Jain over per-user time-averaged rates
  PerStepAveraged,  // time average of per-step Jain over instantaneous rates
};

std::string_view fairness_mode_name(FairnessMode mode);
FairnessMode parse_fairness_mode(std::string_view name);

struct LatencySummary {
  double mean = 0.0;
  std::vector<double> per_user;
};

struct MetricsReport {
  double throughput = 0.0;
  // Missing when undefined (every rate zero; no energy spent).
  std::optional<double> fairness;
  std::optional<double> energy_efficiency;
  double mean_latency = 0.0;
  std::vector<double> per_user_rate;
  std::vector<double> per_user_latency;
  // Mean backlog divided by mean rate, per user; missing for users never served.
  std::vector<std::optional<double>> per_user_delay_ratio;
  FairnessMode fairness_mode = FairnessMode::PerStepAveraged;
  std::size_t steps = 0;
};

double throughput(const TrajectoryRecord& traj);
// (sum v)^2 / (N sum v^2). Missing for an all-zero vector.
std::optional<double> jain_index(std::span<const double> values);
std::optional<double> energy_efficiency(const TrajectoryRecord& traj);
LatencySummary mean_latency(const TrajectoryRecord& traj);
MetricsReport build_report(const TrajectoryRecord& traj,
                           FairnessMode mode = FairnessMode::PerStepAveraged);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

}  // namespace powerlab
