#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "powerlab/config.hpp"
#include "powerlab/errors.hpp"
#include "powerlab/harness.hpp"

using namespace powerlab;
using nlohmann::json;

TEST_SUITE("config") {
  TEST_CASE("empty config gives the defaults") {
    const ExperimentConfig c = config_from_json(json::object());
    CHECK(c.env.n_users == 3);
    CHECK(c.train.total_steps == 100000);
    CHECK(c.seeds.size() == 5);
    CHECK(c.fairness_mode == FairnessMode::PerStepAveraged);
    CHECK(c.evaluation_steps == 1000000);
  }

  TEST_CASE("unknown keys are rejected in every section") {
    for (const char* text :
         {R"({"bogus": 1})", R"({"env": {"users": 3}})", R"({"train": {"lr": 1}})",
          R"({"train": {"schedule": {"floor": 0.1}}})", R"({"waterfill": {"budget": 2}})",
          R"({"experiment": {"seed": 1}})"}) {
      CAPTURE(text);
      CHECK_THROWS_AS(config_from_json(json::parse(text)), ConfigError);
    }
  }

  TEST_CASE("bad values are rejected") {
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"env": {"n_users": "three"}})")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"experiment": {"seeds": []}})")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"experiment": {"policies": ["best"]}})")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"env": {"gamma": 1.0}})")), ConfigError);
  }

  TEST_CASE("overrides") {
    json j = json::object();
    apply_override(j, "train.total_steps=2000");
    apply_override(j, "train.schedule.kind=exponential");
    apply_override(j, "experiment.seeds=[7,8]");
    apply_override(j, "experiment.output_directory=out/x");
    const ExperimentConfig c = config_from_json(j);
    CHECK(c.train.total_steps == 2000);
    CHECK(c.train.schedule.kind == EpsilonSchedule::Kind::Exponential);
    CHECK(c.seeds == std::vector<std::uint64_t>{7, 8});
    CHECK(c.output_directory == "out/x");
    CHECK_THROWS_AS(apply_override(j, "no-equals-sign"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "train..x=1"), ConfigError);
  }

  TEST_CASE("snapshot round-trips and manifests load as configs") {
    ExperimentConfig c;
    c.env.n_users = 5;
    c.train.learning_rate_final = 3e-6;
    c.seeds = {3};
    c.checkpoint = "net.bin";
    const json snap = to_json(c);
    CHECK(to_json(config_from_json(snap)) == snap);

    const auto dir = std::filesystem::temp_directory_path() / "powerlab_config_test";
    std::filesystem::create_directories(dir);
    {
      std::ofstream(dir / "manifest.json") << manifest_json(c, "train").dump(2);
      std::ofstream(dir / "plain.json") << snap.dump();
    }
    CHECK(to_json(load_config(dir / "manifest.json")) == snap);
    CHECK(to_json(load_config(dir / "plain.json")) == snap);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
    std::filesystem::remove_all(dir);
  }
}
