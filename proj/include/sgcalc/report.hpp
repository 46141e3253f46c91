#pragma once

#include "sgcalc/bmo.hpp"
#include "sgcalc/geometry.hpp"
#include "sgcalc/mixed_norm.hpp"
#include "sgcalc/paraproduct.hpp"
#include "sgcalc/semigroup_checks.hpp"
#include "sgcalc/t1.hpp"
#include "sgcalc/weights.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sgcalc {

using Json = nlohmann::json;

/// Non-finite values become null (JSON has no infinity).
Json number(double v);
Json to_json(const Field& f);

Json to_json(const GeometryReport& r);
Json to_json(const DecayTable& t);
Json to_json(const LimitsReport& r);
Json to_json(const BmoReport& r);
Json to_json(const CarlesonReport& r);
Json to_json(const TrilinearResult& r);
Json to_json(const MixedNormResult& r);
Json to_json(const DualityConsistency& r);
Json to_json(const OffDiagonalTable& t);
Json to_json(const WeakBoundTable& t);
Json to_json(const HypothesisReport& r);

/// A CSV table; cells are JSON scalars so numbers print in shortest round-trip form.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<Json>> rows;
};

std::string csv_cell(const Json& v);
void write_csv(const Table& table, const std::filesystem::path& path);
/// Writes `text` through a temporary file and a rename.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sgcalc
