#include "doctest.h"

#include "sgcalc/error.hpp"
#include "sgcalc/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sgcalc;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "seed": 4,
  "space": {"family": "grid2d", "nx": 6, "ny": 6},
  "paraproduct": {"restarts": 2, "max_iterations": 15, "triples": [[2, 4, 2]]},
  "carleson": {"fields": [{"kind": "random", "count": 2}]},
  "t1": {"operator": "riesz", "diagonal": "cancel"}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("sgcalc_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("every suite runs on a small grid") {
  ExperimentConfig cfg = parse_config(kSmall);
  for (const char* suite : {"geometry", "semigroup", "bmo", "carleson", "paraproduct", "weights", "t1-check"}) {
    SuiteResult r = run_suite(suite, cfg);
    CHECK_MESSAGE(!r.summary.empty(), suite);
    CHECK_MESSAGE(r.report.is_object(), suite);
  }
  CHECK_THROWS_AS(run_suite("nonsense", cfg), Error);
}

TEST_CASE("workspace fields") {
  ExperimentConfig cfg = parse_config(kSmall);
  Workspace ws = build_workspace(cfg);
  CHECK(ws.space->size() == 36);
  std::mt19937_64 g(1);
  FieldSpec spec;
  spec.kind = "random_mean_zero";
  spec.count = 3;
  auto fields = make_fields(spec, ws, g);
  REQUIRE(fields.size() == 3);
  CHECK(std::abs(constant_part(fields[0].values, ws.space->measure())) < 1e-12);
  spec.kind = "eigenvector";
  spec.index = 2;
  auto eig = make_fields(spec, ws, g);
  CHECK((ws.generator->apply(eig[0].values) - ws.generator->eigensystem().values[2] * eig[0].values).norm() < 1e-9);
}

TEST_CASE("cli writes reports and is deterministic") {
  const fs::path cfg_path = scratch("cfg.json");
  {
    std::ofstream(cfg_path) << kSmall;
  }
  std::ostringstream log, err;
  CliRequest req;
  req.command = "semigroup";
  req.config = cfg_path;
  req.out = scratch("out_a");
  CHECK(run_cli(req, log, err) == 0);
  CHECK(fs::exists(req.out / "report.json"));
  CHECK(fs::exists(req.out / "meta.json"));
  CHECK(fs::exists(req.out / "summary.csv"));
  CHECK(!fs::is_empty(req.out / "tables"));
  CHECK(slurp(req.out / "summary.csv").rfind("suite,level,quantity,value", 0) == 0);

  const fs::path first = req.out;
  req.out = scratch("out_b");
  CHECK(run_cli(req, log, err) == 0);
  CHECK(slurp(first / "report.json") == slurp(req.out / "report.json"));

  req.seed = 12345;
  req.out = scratch("out_c");
  CHECK(run_cli(req, log, err) == 0);
  CHECK(slurp(req.out / "report.json").find("12345") != std::string::npos);
}

TEST_CASE("cli error and flag exit codes") {
  std::ostringstream log, err;
  CliRequest bad;
  bad.command = "geometry";
  bad.config = scratch("missing.json");
  bad.out = scratch("out_err");
  CHECK(run_cli(bad, log, err) == 1);
  CHECK(!err.str().empty());

  // an oscillating multiplier with growing amplitude drifts under refinement
  const fs::path cfg_path = scratch("flag.json");
  {
    std::ofstream(cfg_path) << R"({
      "space": {"family": "path", "n": 16},
      "sweep": {"suite": "bmo", "levels": [16, 64], "max_drift": 0.01},
      "bmo": {"fields": [{"kind": "log_distance", "power": 2}]}
    })";
  }
  CliRequest sweep;
  sweep.command = "sweep";
  sweep.config = cfg_path;
  sweep.out = scratch("out_flag");
  CHECK(run_cli(sweep, log, err) == 2);
  CHECK(fs::exists(sweep.out / "tables" / "sweep.csv"));
}
