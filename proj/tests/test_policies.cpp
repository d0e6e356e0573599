#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "powerlab/errors.hpp"
#include "powerlab/policies.hpp"

using namespace powerlab;

namespace {

double sum_rate(const ChannelState& s, std::span<const double> p) {
  double r = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) r += std::log2(1.0 + p[i] * s.gains[i]);
  return r;
}

}  // namespace

TEST_SUITE("policies") {
  TEST_CASE("names round-trip") {
    for (PolicyKind k : {PolicyKind::Fixed, PolicyKind::Random, PolicyKind::WaterFilling,
                         PolicyKind::MyopicOracle, PolicyKind::LearnedGreedy}) {
      CHECK(parse_policy(policy_name(k)) == k);
    }
    CHECK_THROWS_AS(parse_policy("greedy-ish"), ConfigError);
  }

  TEST_CASE("fixed policy picks the 2 W level") {
    EnvParams p;
    const ActionVector a = fixed_policy(ChannelState{{0.2, 0.5, 0.9}}, p);
    CHECK(a.levels == std::vector<std::size_t>{2, 2, 2});
    CHECK(nearest_level(p, 2.4) == 2);
    CHECK(nearest_level(p, 2.6) == 3);
  }

  TEST_CASE("random policy is uniform and independent across users") {
    EnvParams p;
    p.n_users = 2;
    Rng rng = make_stream(4, Stream::Policy);
    std::array<int, 16> joint{};
    const int n = 64000;
    for (int i = 0; i < n; ++i) {
      const ActionVector a = random_policy(ChannelState{{0.5, 0.5}}, p, rng);
      ++joint[a.levels[0] * 4 + a.levels[1]];
    }
    // chi-square with 15 degrees of freedom; 37.70 is the 0.999 quantile
    double chi2 = 0.0;
    const double expected = n / 16.0;
    for (int c : joint) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 37.70);
  }

  TEST_CASE("water-filling satisfies KKT and the budget") {
    Rng rng(21);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    const WaterFillConfig cfg;
    for (int trial = 0; trial < 500; ++trial) {
      ChannelState s{{u(rng), u(rng), u(rng)}};
      const double budget = 0.5 + trial % 10;
      const WaterFillResult r = waterfill_allocate(s, 1.0, budget, cfg);
      CHECK(std::accumulate(r.powers.begin(), r.powers.end(), 0.0) ==
            doctest::Approx(budget).epsilon(1e-8));
      for (std::size_t i = 0; i < 3; ++i) {
        const double floor = 1.0 / s.gains[i];
        if (r.powers[i] > 0.0) {
          CHECK(r.powers[i] + floor == doctest::Approx(r.water_level).epsilon(1e-8));
        } else {
          CHECK(floor >= r.water_level - 1e-8);
        }
      }
    }
  }

  TEST_CASE("water-filling beats the equal split") {
    Rng rng(22);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      ChannelState s{{u(rng), u(rng)}};
      const WaterFillResult r = waterfill_allocate(s, 1.0, 4.0, {});
      const std::array<double, 2> equal{2.0, 2.0};
      CHECK(sum_rate(s, r.powers) >= sum_rate(s, equal) - 1e-12);
    }
  }

  TEST_CASE("water-filling edge cases") {
    const WaterFillConfig cfg;
    const WaterFillResult none = waterfill_allocate(ChannelState{{0.3, 0.6}}, 1.0, 0.0, cfg);
    CHECK(none.powers[0] == doctest::Approx(0.0));
    CHECK(none.powers[1] == doctest::Approx(0.0));
    // Equal gains share the budget evenly.
    const WaterFillResult even = waterfill_allocate(ChannelState{{0.5, 0.5, 0.5}}, 1.0, 6.0, cfg);
    for (double pw : even.powers) CHECK(pw == doctest::Approx(2.0));
    CHECK_THROWS_AS(waterfill_allocate(ChannelState{{0.0, 0.5}}, 1.0, 1.0, cfg), DomainError);
    WaterFillConfig tight;
    tight.max_iterations = 2;
    CHECK_THROWS_AS(waterfill_allocate(ChannelState{{0.2, 0.9}}, 1.0, 3.0, tight), SolverError);
    CHECK(cfg.budget_for(3) == 6.0);
  }

  TEST_CASE("discrete water-filling floors onto the levels") {
    EnvParams p;
    const WaterFillDecision d = waterfill_policy(ChannelState{{1.0, 0.5, 0.5}}, p, {});
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(p.power_levels[d.discrete.levels[i]] <= d.powers[i] + 1e-12);
      if (d.discrete.levels[i] + 1 < p.num_levels()) {
        CHECK(p.power_levels[d.discrete.levels[i] + 1] > d.powers[i]);
      }
    }
  }

  TEST_CASE("myopic oracle per-user argmax") {
    EnvParams p;
    CHECK(myopic_oracle(ChannelState{{1.0, 0.1, 0.55}}, p).levels ==
          std::vector<std::size_t>{3, 3, 3});
    p.lambda_penalty = 0.5;
    p.n_users = 1;
    // rewards at h=0.5: 0, 0.085, 0, -0.178
    CHECK(myopic_oracle(ChannelState{{0.5}}, p).levels[0] == 1);
    // Exact tie between 0 W and 1 W goes to the lower level.
    p.power_levels = {0.0, 1.0};
    p.lambda_penalty = 1.0;
    CHECK(myopic_oracle(ChannelState{{1.0}}, p).levels[0] == 0);
  }
}
