#include <doctest.h>

#include "dav/config.hpp"

using namespace dav;

namespace {

const char* kGoodConfig = R"(# reference experiment
[map]
matrix = 3 2 1 2 2 1 1 1 1

[perturbation]
kind = shear
target = 0
frequency = 0 1 0
amplitude = 0.05

[run]
scenario = exponents
seed = 12345
out_dir = out

[exponents]
samples = 100
orbit_length = 500
)";

}  // namespace

TEST_CASE("well-formed config parses") {
  ExperimentConfig cfg = parse_config_text(kGoodConfig);
  CHECK(cfg.scenario == "exponents");
  CHECK(cfg.seed == 12345);
  CHECK(cfg.exp_samples == 100);
  CHECK(cfg.exp_orbit_length == 500);
  REQUIRE(cfg.perturbations.size() == 1);
  CHECK(cfg.perturbations[0].kind == "shear");
  CHECK(cfg.perturbations[0].amplitude == 0.05);
  DAMap f = build_map(cfg);
  CHECK(f.perturbations().size() == 1);
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK_THROWS_AS(parse_config_text("[map]\nmatrix = 3 2 1 2 2 1 1 1 1\nfoo = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("[mystery]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("loose = 1\n"), ConfigError);
}

TEST_CASE("out-of-range parameters are rejected") {
  CHECK_THROWS_AS(parse_config_text("[exponents]\nsamples = -5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[conjugacy]\ninterpolation_order = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[run]\nscenario = destroy\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[map]\nmatrix = 1 2 3\n"), ConfigError);
}

TEST_CASE("twist specs build with eigen frames") {
  const char* text = R"(
[map]
matrix = 3 2 1 2 2 1 1 1 1
[perturbation]
kind = twist
frame = eigen
plane = 0 1
center = 0.5 0.5 0.5
radius = 0.1
max_angle = 0.2
)";
  ExperimentConfig cfg = parse_config_text(text);
  DAMap f = build_map(cfg);
  REQUIRE(f.perturbations().size() == 1);
  CHECK(std::holds_alternative<TwistPerturbation>(f.perturbations()[0]));
}

TEST_CASE("config echo preserves the source text") {
  ExperimentConfig cfg = parse_config_text(kGoodConfig);
  CHECK(cfg.source_text == kGoodConfig);
}
