#include "doctest.h"

#include "sgcalc/config.hpp"
#include "sgcalc/error.hpp"

#include <cmath>
#include <string>

using namespace sgcalc;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty config gives defaults") {
  ExperimentConfig cfg = parse_config("{}");
  CHECK(cfg.seed == 0);
  CHECK(cfg.space.family == "path");
  CHECK(cfg.grid.rho == doctest::Approx(std::pow(2.0, 0.25)));
  CHECK(cfg.paraproduct.triples.size() == 3);
  CHECK(std::isinf(cfg.paraproduct.triples[0].p));
}

TEST_CASE("nested fields parse") {
  ExperimentConfig cfg = parse_config(R"({
    "seed": 7,
    "suites": ["geometry", "t1-check"],
    "space": {"family": "grid2d", "nx": 12, "ny": 10},
    "generator": {"kind": "divergence-form", "coefficients": "uniform", "low": 1, "high": 3},
    "grid": {"rho": 2.0},
    "paraproduct": {"triples": [["inf", 2, 2], [4, 4, 2]], "restarts": 4},
    "t1": {"operator": "sign", "gamma": 1.5, "thresholds": {"exponent_margin": 0.5}, "harness": {"q2_cap": 6}}
  })");
  CHECK(cfg.seed == 7);
  CHECK(cfg.suites.size() == 2);
  CHECK(cfg.space.nx == 12);
  CHECK(cfg.generator.kind == GeneratorKind::DivergenceForm);
  CHECK(cfg.grid.rho == 2.0);
  REQUIRE(cfg.paraproduct.triples.size() == 2);
  CHECK(std::isinf(cfg.paraproduct.triples[0].p));
  CHECK(cfg.paraproduct.restarts == 4);
  CHECK(cfg.t1.operator_kind == "sign");
  CHECK(cfg.t1.thresholds.exponent_margin == 0.5);
  CHECK(cfg.t1.harness.q2_cap == 6);
}

TEST_CASE("unknown keys name the field and the line") {
  const std::string msg = error_of("{\n  \"space\": {\n    \"famly\": \"path\"\n  }\n}");
  CHECK(msg.find("test.json:3") != std::string::npos);
  CHECK(msg.find("space.famly") != std::string::npos);
  CHECK(msg.find("unknown key") != std::string::npos);
}

TEST_CASE("type and value errors") {
  CHECK(error_of(R"({"seed": "seven"})").find("seed") != std::string::npos);
  CHECK(error_of(R"({"suites": ["nope"]})").find("unknown suite") != std::string::npos);
  CHECK(error_of("{\n\"seed\": 1,,\n}").find("test.json:2") != std::string::npos);
  CHECK(!error_of(R"({"t1": {"operator": "csv"}})").empty());
}

TEST_CASE("refinement levels resize the space") {
  ExperimentConfig grid = parse_config(R"({"space": {"family": "grid2d", "nx": 8, "ny": 8}})");
  ExperimentConfig g32 = at_level(grid, 32);
  CHECK(g32.space.nx == 32);
  CHECK(g32.space.ny == 32);
  ExperimentConfig path = parse_config(R"({"space": {"family": "cycle", "n": 8}})");
  CHECK(at_level(path, 20).space.n == 20);
  CHECK_THROWS_AS(at_level(path, 1), ConfigError);
}

TEST_CASE("seed override is echoed") {
  ExperimentConfig cfg = parse_config(R"({"seed": 3})");
  set_seed(cfg, 99);
  CHECK(cfg.seed == 99);
  CHECK(cfg.echo["seed"] == 99);
  ExperimentConfig again = parse_config(cfg.echo.dump());
  CHECK(again.seed == 99);
}
