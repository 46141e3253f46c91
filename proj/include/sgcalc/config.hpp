#pragma once

#include "sgcalc/generator.hpp"
#include "sgcalc/scale_grid.hpp"
#include "sgcalc/t1.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sgcalc {

struct SpaceSpec {
  std::string family = "path";  ///< path, cycle, grid2d or file
  std::size_t n = 16;           ///< path / cycle length
  std::size_t nx = 16;
  std::size_t ny = 16;
  double edge_length = 1.0;
  double vertex_measure = 1.0;
  std::string file;  ///< edge list for family "file"
};

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Combinatorial;
  double m = 2.0;
  std::string coefficients = "ones";  ///< ones, uniform (seeded in [low, high]) or values
  double low = 0.5;
  double high = 2.0;
  std::vector<double> values;
};

/// Test fields. Kinds: values, constant, random, random_mean_zero,
/// eigenvector, indicator, log_distance, coordinate, oscillating.
struct FieldSpec {
  std::string kind = "random";
  std::size_t count = 1;       ///< random kinds: number of fields
  double value = 1.0;          ///< constant
  std::size_t index = 1;       ///< eigenvector index (0 is the constant mode)
  std::vector<double> values;  ///< explicit values
  long long center = -1;       ///< indicator / log_distance center, -1 for the central vertex
  double radius = 1.0;         ///< indicator radius
  double power = 1.0;          ///< log_distance exponent, oscillating amplitude growth
};

struct WeightSpec {
  std::string family = "power";  ///< constant, power, checkerboard
  double alpha = 0.5;
  double a = 1.0;
  double b = 2.0;
  double c = 1.0;
};

struct SemigroupSpec {
  std::vector<double> times;  ///< explicit times (empty: every 8th grid scale)
  std::vector<FieldSpec> fields;
  std::vector<int> k{1, 2, 3};
  int resolvent_power = 2;
  bool oracle = true;
};

struct BmoSpec {
  std::vector<FieldSpec> fields;
  int kappa = 1;
  bool l2_average = false;
};

struct CarlesonSpec {
  std::vector<FieldSpec> fields;
  std::vector<int> k{1, 2};
};

struct ExponentTriple {
  double p = 2.0;
  double q = 2.0;
  double r = 2.0;
};

struct ParaproductSpec {
  std::vector<std::string> operators{"pi1", "pi2"};
  std::vector<ExponentTriple> triples{{std::numeric_limits<double>::infinity(), 2.0, 2.0},
                                      {4.0, 4.0, 2.0},
                                      {2.0, std::numeric_limits<double>::infinity(), 2.0}};
  std::size_t restarts = 16;
  std::size_t max_iterations = 60;
  double tolerance = 1e-6;
  std::optional<WeightSpec> weight;
  int order = 0;  ///< psi order N, 0 for the dimension-based choice
  bool residuals = true;
};

struct WeightsSpec {
  std::vector<WeightSpec> weights;
  std::vector<double> p{2.0, 4.0};
  std::vector<double> q{1.0, 2.0};
  double duality_p = 4.0;
  std::vector<double> alphas{-0.5, 0.0, 0.5, 1.0};
};

struct T1Spec {
  std::string operator_kind = "riesz";  ///< riesz, sign, zero, identity, semigroup, multiplication, paraproduct, random, csv
  double gamma = 2.0;
  std::string diagonal = "zero";  ///< zero, cancel, prescribed (uses `field`)
  double truncation = std::numeric_limits<double>::infinity();
  double taper = 0.0;  ///< smooth boundary cutoff width for riesz / sign, 0 disables it
  double s0 = 1.0;
  FieldSpec field;
  std::string csv;
  std::size_t random_count = 1;  ///< random operators per run
  int kappa = 1;
  Thresholds thresholds;
  HarnessOptions harness;
};

struct SweepSpec {
  std::string suite = "geometry";
  std::vector<std::size_t> levels;
  double max_drift = 0.25;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::vector<std::string> suites;
  SpaceSpec space;
  GeneratorSpec generator;
  ScaleGridParams grid;
  SemigroupSpec semigroup;
  BmoSpec bmo;
  CarlesonSpec carleson;
  ParaproductSpec paraproduct;
  WeightsSpec weights;
  T1Spec t1;
  SweepSpec sweep;
  nlohmann::json echo;  ///< the parsed document, with command-line overrides applied
};

/// Parses a JSON config. Unknown keys and type mismatches throw ConfigError
/// naming the field and, when it can be located, the line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Copy of the config with the space resized to refinement `level`
/// (n for path / cycle, nx = ny for grid2d).
ExperimentConfig at_level(const ExperimentConfig& config, std::size_t level);

/// Overrides the seed in both the config and its echo.
void set_seed(ExperimentConfig& config, std::uint64_t seed);

}  // namespace sgcalc
