#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "powerlab/errors.hpp"
#include "powerlab/harness.hpp"

using namespace powerlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("powerlab_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// Relative path -> contents for every file below `root`, manifests aside
// (they record the output directory and thread count).
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename().string().rfind("manifest", 0) != 0) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

ExperimentConfig quick(const fs::path& out) {
  ExperimentConfig c;
  c.output_directory = out;
  c.seeds = {1, 2};
  c.evaluation_steps = 2000;
  c.greedy_eval_steps = 500;
  c.train.total_steps = 600;
  c.train.hidden_layers = {16, 16};
  c.calibration_draws = 2000;
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("fixed policy sum-rate") {
    const ExperimentConfig c;
    const MetricsReport r = simulate_policy(PolicyKind::Fixed, c, 200000, 1);
    CHECK(r.throughput == doctest::Approx(3.0706585692713038).epsilon(0.01 / 3.07));
    CHECK(r.steps == 200000);
  }

  TEST_CASE("comparison is deterministic and seed-isolated") {
    const fs::path a = scratch("cmp_a"), b = scratch("cmp_b"), p = scratch("cmp_perm");
    ExperimentConfig c = quick(a);
    c.policies = {PolicyKind::Fixed, PolicyKind::Random, PolicyKind::WaterFilling,
                  PolicyKind::MyopicOracle};
    const ComparisonTable t1 = run_comparison(c);
    c.output_directory = b;
    c.jobs = 3;
    run_comparison(c);
    CHECK(snapshot(a).size() == 2);
    CHECK(snapshot(a) == snapshot(b));
    CHECK(line_count(a / "comparison.csv") == 5);

    c.output_directory = p;
    c.seeds = {2, 1};
    const ComparisonTable t2 = run_comparison(c);
    for (PolicyKind k : c.policies) {
      const auto& r1 = t1.find(k)->per_seed;
      const auto& r2 = t2.find(k)->per_seed;
      CHECK(to_json(r1[0]) == to_json(r2[1]));
      CHECK(to_json(r1[1]) == to_json(r2[0]));
    }
    for (const fs::path& d : {a, b, p}) fs::remove_all(d);
  }

  TEST_CASE("dqn policy needs a checkpoint") {
    ExperimentConfig c = quick(scratch("nockpt"));
    c.policies = {PolicyKind::LearnedGreedy};
    CHECK_THROWS_AS(run_comparison(c), ConfigError);
  }

  TEST_CASE("training artifacts, plots and manifest replay") {
    const fs::path out = scratch("train");
    ExperimentConfig c = quick(out);
    c.checkpoint_interval = 1;
    const RunArtifacts art = run_training(c);
    REQUIRE(art.results.size() == 2);
    for (const fs::path& p : art.training_logs) CHECK(line_count(p) == 1 + 3);
    CHECK(art.checkpoints.size() == 2 * 4);
    CHECK(fs::exists(art.manifest));
    CHECK(line_count(out / "comparison.csv") == 2);

    // A saved network evaluates exactly like the live one.
    const fs::path final_ckpt = out / "train" / "seed_1" / "checkpoints" / "final.bin";
    const DqnAgent reloaded = make_agent(c.env, c.train, load_checkpoint(final_ckpt));
    Rng rng = make_stream(1, Stream::Evaluation);
    CHECK(to_json(evaluate_greedy(reloaded, c.greedy_eval_steps, rng)) ==
          to_json(art.results[0].greedy));

    // Baselines merge into the same table.
    c.policies = {PolicyKind::Fixed, PolicyKind::LearnedGreedy};
    c.checkpoint = final_ckpt;
    run_comparison(c);
    CHECK(line_count(out / "comparison.csv") == 3);

    const PlotFiles plots = emit_plot_data(out);
    CHECK(line_count(plots.training) == 1 + 2 * 3);
    CHECK(line_count(plots.per_user) == 1 + 3 * 2);
    const std::string first = slurp(plots.training) + slurp(plots.per_user);
    emit_plot_data(out);
    CHECK(slurp(plots.training) + slurp(plots.per_user) == first);

    // Re-running from the manifest reproduces the metrics.
    const std::string metrics = slurp(out / "train" / "seed_2" / "metrics.json");
    fs::remove_all(out / "train");
    run_training(load_config(art.manifest));
    CHECK(slurp(out / "train" / "seed_2" / "metrics.json") == metrics);
    fs::remove_all(out);
  }

  TEST_CASE("emit-plots without inputs is a file error") {
    const fs::path out = scratch("empty");
    fs::create_directories(out);
    CHECK_THROWS_AS(emit_plot_data(out), ConfigError);
    fs::remove_all(out);
  }

  TEST_CASE("water-filling calibration") {
    const fs::path out = scratch("calib");
    const ExperimentConfig c = quick(out);
    const CalibrationTable t = calibrate_waterfill(c, {0.0, 1.0, 2.0, 4.0, 6.0, 9.0});
    CHECK(t.rows.front().sum_rate == doctest::Approx(0.0));
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      CHECK(t.rows[i].sum_rate > t.rows[i - 1].sum_rate);
    }
    const auto closest = std::min_element(t.rows.begin(), t.rows.end(), [&](auto& x, auto& y) {
      return std::abs(x.sum_rate - t.target) < std::abs(y.sum_rate - t.target);
    });
    CHECK(t.best_budget == closest->budget);
    CHECK(line_count(out / "calibration.csv") == 7);
    CHECK_THROWS_AS(calibrate_waterfill(c, {2.0}), ConfigError);
    fs::remove_all(out);
  }

  TEST_CASE("ablation bookkeeping") {
    const fs::path out = scratch("ablate");
    ExperimentConfig c = quick(out);
    c.seeds = {1, 2, 3};
    const AblationReport r = run_ablation(c, {0.9, 0.5});
    REQUIRE(r.arms.size() == 2);
    CHECK(r.arms[0].mean_epsilon > r.arms[1].mean_epsilon);
    CHECK(line_count(out / "ablation" / "curves.csv") == 1 + 2 * 3 * 3);
    CHECK(line_count(out / "ablation" / "summary.csv") == 3);
    c.seeds = {1, 2};
    CHECK_THROWS_AS(run_ablation(c, {0.9, 0.5}), ConfigError);
    CHECK_THROWS_AS(run_ablation(c, {0.9}), ConfigError);
    fs::remove_all(out);
  }

  TEST_CASE("averaging reports") {
    MetricsReport a, b;
    a.throughput = 1.0;
    b.throughput = 3.0;
    a.fairness = 0.5;
    a.per_user_rate = b.per_user_rate = {1.0};
    a.per_user_latency = b.per_user_latency = {2.0};
    a.per_user_delay_ratio = b.per_user_delay_ratio = {std::nullopt};
    const MetricsReport m = average_reports({a, b});
    CHECK(m.throughput == 2.0);
    CHECK(*m.fairness == 0.5);
    CHECK_FALSE(m.per_user_delay_ratio[0].has_value());
  }
}
