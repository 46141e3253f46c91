#pragma once

#include "sgcalc/calculus.hpp"
#include "sgcalc/config.hpp"
#include "sgcalc/report.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sgcalc {

/// Space, generator, calculus and scale grid built from a config.
struct Workspace {
  SpacePtr space;
  GeneratorPtr generator;
  Calculus calc;
  ScaleGrid grid;
};

Workspace build_workspace(const ExperimentConfig& config);

struct NamedField {
  std::string label;
  Field values;
};

/// Expands a field spec (random kinds may yield several fields).
std::vector<NamedField> make_fields(const FieldSpec& spec, const Workspace& ws, std::mt19937_64& gen);

struct SummaryRow {
  std::string suite;
  std::string quantity;
  double value = 0.0;
};

struct SuiteResult {
  std::string suite;
  Json report;
  std::vector<Table> tables;
  std::vector<SummaryRow> summary;
  std::vector<std::string> flags;  ///< non-empty means a flagged verdict
};

/// Runs one of geometry, semigroup, bmo, carleson, paraproduct, weights, t1-check.
SuiteResult run_suite(const std::string& suite, const ExperimentConfig& config);

struct StabilityRow {
  std::string quantity;
  std::vector<double> values;  ///< one per level
  double ratio = 1.0;          ///< max / min of |value| across levels
  bool flagged = false;        ///< ratio - 1 above the configured drift
};

struct SweepResult {
  std::vector<std::size_t> levels;
  std::vector<SuiteResult> per_level;
  std::vector<StabilityRow> stability;
};

/// Runs the sweep suite at every level (at least two).
SweepResult run_sweep(const ExperimentConfig& config, const std::vector<std::size_t>& levels);

struct CliRequest {
  std::string command;  ///< a suite name, "sweep", or "run" for every suite listed in the config
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = "sgcalc-out";
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> levels;
};

/// Executes a request and writes report.json, summary.csv, tables/*.csv and
/// meta.json under `out`. Returns 0 on success, 2 on a flagged verdict and 1
/// on error (after printing the error to `err`).
int run_cli(const CliRequest& request, std::ostream& log, std::ostream& err);

}  // namespace sgcalc
