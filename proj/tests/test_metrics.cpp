#include <array>

#include "doctest.h"
#include "powerlab/errors.hpp"
#include "powerlab/metrics.hpp"

using namespace powerlab;

TEST_SUITE("metrics") {
  TEST_CASE("jain index") {
    CHECK(*jain_index(std::vector<double>{2, 2, 2}) == doctest::Approx(1.0));
    CHECK(*jain_index(std::vector<double>{0, 5, 0}) == doctest::Approx(1.0 / 3.0));
    CHECK(*jain_index(std::vector<double>{1, 2, 3}) == doctest::Approx(36.0 / 42.0));
    CHECK_FALSE(jain_index(std::vector<double>{0, 0}).has_value());
    CHECK_THROWS_AS(jain_index(std::vector<double>{1, -1}), ContractViolation);
    CHECK_THROWS_AS(jain_index(std::vector<double>{}), ContractViolation);
  }

  TEST_CASE("report over a short trajectory") {
    TrajectoryRecord t(2);
    t.record(std::vector<double>{1, 1}, std::vector<double>{1, 1}, std::vector<double>{0, 2});
    t.record(std::vector<double>{0, 0}, std::vector<double>{0, 0}, std::vector<double>{1, 2});
    t.record(std::vector<double>{3, 0}, std::vector<double>{2, 0}, std::vector<double>{2, 5});
    CHECK(t.steps() == 3);
    CHECK(throughput(t) == doctest::Approx(5.0 / 3.0));
    CHECK(*energy_efficiency(t) == doctest::Approx(5.0 / 4.0));
    const LatencySummary lat = mean_latency(t);
    CHECK(lat.per_user[0] == doctest::Approx(1.0));
    CHECK(lat.per_user[1] == doctest::Approx(3.0));
    CHECK(lat.mean == doctest::Approx(2.0));

    const MetricsReport per_step = build_report(t, FairnessMode::PerStepAveraged);
    // step 2 has no defined index and is skipped: (1 + 0.5) / 2
    CHECK(*per_step.fairness == doctest::Approx(0.75));
    const MetricsReport on_avg = build_report(t, FairnessMode::OnAverages);
    // averages (4/3, 1/3): 25/9 / (2 * 17/9)
    CHECK(*on_avg.fairness == doctest::Approx(25.0 / 34.0));
    CHECK(per_step.per_user_rate[0] == doctest::Approx(4.0 / 3.0));
    CHECK(*per_step.per_user_delay_ratio[0] == doctest::Approx(1.0 / (4.0 / 3.0)));
    CHECK(per_step.steps == 3);
  }

  TEST_CASE("undefined metrics are missing, not zero") {
    TrajectoryRecord t(2);
    t.record(std::vector<double>{0, 0}, std::vector<double>{0, 0}, std::vector<double>{0.8, 0.8});
    const MetricsReport r = build_report(t);
    CHECK(r.throughput == 0.0);
    CHECK_FALSE(r.fairness.has_value());
    CHECK_FALSE(r.energy_efficiency.has_value());
    CHECK_FALSE(r.per_user_delay_ratio[0].has_value());
    const nlohmann::json j = to_json(r);
    CHECK(j.at("fairness").is_null());
    const MetricsReport back = report_from_json(j);
    CHECK_FALSE(back.fairness.has_value());
    CHECK(back.per_user_latency == r.per_user_latency);
  }

  TEST_CASE("json round-trip") {
    TrajectoryRecord t(3);
    t.record(std::vector<double>{1, 0.5, 2}, std::vector<double>{1, 1, 3},
             std::vector<double>{0, 0.3, 0});
    const MetricsReport r = build_report(t, FairnessMode::OnAverages);
    const MetricsReport back = report_from_json(to_json(r));
    CHECK(back.throughput == r.throughput);
    CHECK(back.fairness == r.fairness);
    CHECK(back.energy_efficiency == r.energy_efficiency);
    CHECK(back.fairness_mode == FairnessMode::OnAverages);
    CHECK(back.per_user_rate == r.per_user_rate);
    CHECK(to_json(back) == to_json(r));
  }

  TEST_CASE("empty and malformed input") {
    TrajectoryRecord t(2);
    CHECK_THROWS_AS(throughput(t), ContractViolation);
    CHECK_THROWS_AS(t.record(std::vector<double>{1}, std::vector<double>{1, 1},
                             std::vector<double>{0, 0}),
                    ContractViolation);
    CHECK_THROWS_AS(parse_fairness_mode("max-min"), ConfigError);
    CHECK(parse_fairness_mode(fairness_mode_name(FairnessMode::OnAverages)) ==
          FairnessMode::OnAverages);
  }
}
