#include <array>
#include <cmath>

#include "doctest.h"
#include "powerlab/env.hpp"
#include "powerlab/errors.hpp"

using namespace powerlab;

TEST_SUITE("env") {
  TEST_CASE("shannon rate and reward") {
    CHECK(compute_rate(compute_snr(2.0, 0.5, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(compute_rate(0.0) == 0.0);
    CHECK(compute_snr(3.0, 0.2, 2.0) == doctest::Approx(0.3));
    const std::array<double, 2> rates{1.0, 2.0};
    const std::array<double, 2> powers{1.0, 3.0};
    CHECK(compute_reward(rates, powers, 0.1) == doctest::Approx(2.6));
    CHECK_THROWS_AS(compute_snr(-1.0, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(compute_snr(1.0, 0.5, 0.0), ConfigError);
  }

  TEST_CASE("queues drain but never go negative") {
    const QueueState q{{1.0, 0.5, 0.0}};
    const std::array<double, 3> arrivals{0.8, 0.8, 0.8};
    const std::array<double, 3> rates{0.5, 2.0, 0.8};
    const QueueState next = update_queues(q, arrivals, rates);
    CHECK(next.backlogs[0] == doctest::Approx(1.3));
    CHECK(next.backlogs[1] == 0.0);
    CHECK(next.backlogs[2] == 0.0);
  }

  TEST_CASE("channel draws stay in range with the right mean") {
    EnvParams p;
    Rng rng = make_stream(3, Stream::Channel);
    double sum = 0.0;
    std::array<int, 10> bins{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const ChannelState s = sample_channel(p, rng);
      REQUIRE(s.gains.size() == 3);
      for (double h : s.gains) {
        REQUIRE(h >= 0.1);
        REQUIRE(h < 1.0);
        sum += h;
        ++bins[static_cast<std::size_t>((h - 0.1) / 0.09)];
      }
    }
    CHECK(sum / (3.0 * n) == doctest::Approx(0.55).epsilon(0.005));
    // chi-square with 9 degrees of freedom; 27.88 is the 0.999 quantile
    double chi2 = 0.0;
    const double expected = 3.0 * n / 10.0;
    for (int b : bins) chi2 += (b - expected) * (b - expected) / expected;
    CHECK(chi2 < 27.88);
  }

  TEST_CASE("bad channel bounds are rejected") {
    EnvParams p;
    p.h_min = 1.0;
    p.h_max = 0.5;
    Rng rng(1);
    CHECK_THROWS_AS(sample_channel(p, rng), ConfigError);
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }

  TEST_CASE("step applies the chosen powers and draws a fresh state") {
    EnvParams p;
    Rng a(5), b(5);
    const ChannelState s{{0.5, 1.0 / 3.0, 0.25}};
    const ActionVector act{{2, 3, 0}};
    const StepOutcome out = step(s, act, empty_queues(p), p, a);
    CHECK(out.powers_used == std::vector<double>{2.0, 3.0, 0.0});
    CHECK(out.rates[0] == doctest::Approx(1.0));
    CHECK(out.rates[1] == doctest::Approx(1.0));
    CHECK(out.rates[2] == 0.0);
    CHECK(out.reward == doctest::Approx(2.0 - 0.5));
    CHECK(out.next_queues.backlogs == std::vector<double>{0.0, 0.0, 0.8});
    // Same rng seed, same next state.
    CHECK(step(s, act, empty_queues(p), p, b).next_state.gains == out.next_state.gains);
    CHECK_THROWS_AS(step(s, ActionVector{{0, 4, 0}}, empty_queues(p), p, a), ContractViolation);
    CHECK_THROWS_AS(step(s, ActionVector{{0, 1}}, empty_queues(p), p, a), ContractViolation);
  }

  TEST_CASE("bernoulli arrivals keep the configured mean") {
    EnvParams p;
    p.arrival_kind = ArrivalKind::Bernoulli;
    p.arrival_burst = 2.0;
    Rng rng(9);
    double sum = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
      for (double a : draw_arrivals(p, rng)) {
        REQUIRE((a == 0.0 || a == 2.0));
        sum += a;
      }
    }
    CHECK(sum / (3.0 * n) == doctest::Approx(0.8).epsilon(0.02));
  }

  TEST_CASE("per-purpose streams are independent of each other") {
    Rng c1 = make_stream(1, Stream::Channel);
    Rng c2 = make_stream(1, Stream::Channel);
    Rng e1 = make_stream(1, Stream::Exploration);
    Rng other = make_stream(2, Stream::Channel);
    const auto first = c1();
    CHECK(first == c2());
    CHECK(first != e1());
    CHECK(first != other());
  }
}
