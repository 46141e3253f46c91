#include "sgcalc/report.hpp"

#include "sgcalc/error.hpp"

#include <cmath>
#include <fstream>

namespace sgcalc {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const Field& f) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < f.size(); ++i) out.push_back(number(f[i]));
  return out;
}

namespace {

Json witness(const BallPairWitness& w) {
  return {{"x", w.x}, {"y", w.y}, {"radius", number(w.radius)}, {"ratio", number(w.ratio)}};
}

Json witness(const BmoWitness& w) { return {{"center", w.center}, {"radius", number(w.radius)}, {"t", number(w.t)}}; }

Json per_scale(const std::vector<ScaleSup>& rows) {
  Json out = Json::array();
  for (const ScaleSup& s : rows)
    out.push_back({{"t", number(s.t)},
                   {"radius", number(s.radius)},
                   {"sup", number(s.sup)},
                   {"center", s.center},
                   {"saturated", s.saturated}});
  return out;
}

template <class T>
Json numbers(const std::vector<T>& v) {
  Json out = Json::array();
  for (const T& x : v) out.push_back(number(static_cast<double>(x)));
  return out;
}

}  // namespace

Json to_json(const GeometryReport& r) {
  std::size_t saturated = 0;
  for (bool s : r.saturated) saturated += s;
  return {{"C0", number(r.C0)},
          {"d_hom", number(r.d_hom)},
          {"c_comp", number(r.c_comp)},
          {"N_comp", number(r.N_comp)},
          {"dilation_C", number(r.dilation_C)},
          {"doubling_witness", witness(r.doubling_witness)},
          {"comparison_witness", witness(r.comparison_witness)},
          {"radii", numbers(r.radii)},
          {"saturated_radii", saturated},
          {"comparison_sampled", r.comparison_sampled}};
}

Json to_json(const DecayTable& t) {
  Json rows = Json::array();
  for (const DecayRow& row : t.rows)
    rows.push_back({{"s", number(row.s)},
                    {"r", number(row.r)},
                    {"center1", row.center1},
                    {"center2", row.center2},
                    {"distance", number(row.distance)},
                    {"ratio", number(row.ratio)}});
  return {{"family", t.family},
          {"rows", rows},
          {"fitted_exponent", number(t.fitted_exponent)},
          {"near_exponent", number(t.near_exponent)},
          {"far_exponent", number(t.far_exponent)}};
}

Json to_json(const LimitsReport& r) {
  return {{"k", r.k},
          {"t", numbers(r.t)},
          {"heat_defect", numbers(r.heat_defect)},
          {"derivative_norm", numbers(r.derivative_norm)},
          {"centered_derivative", numbers(r.centered_derivative)},
          {"small_t_heat", r.small_t_heat},
          {"small_t_derivative", r.small_t_derivative},
          {"large_t_centered", r.large_t_centered},
          {"monotone_tail", r.monotone_tail}};
}

Json to_json(const BmoReport& r) {
  return {{"norm", number(r.norm)},
          {"norm_unsaturated", number(r.norm_unsaturated)},
          {"witness", witness(r.witness)},
          {"per_scale", per_scale(r.per_scale)}};
}

Json to_json(const CarlesonReport& r) {
  return {{"k", r.k}, {"norm", number(r.norm)}, {"witness", witness(r.witness)}, {"per_scale", per_scale(r.per_scale)}};
}

Json to_json(const TrilinearResult& r) {
  return {{"value", number(r.value)},
          {"quadrature_error_estimate", number(r.quadrature_error_estimate)},
          {"per_scale", numbers(r.per_scale)}};
}

Json to_json(const MixedNormResult& r) {
  return {{"estimate", number(r.estimate)},
          {"best_restart", r.best_restart},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"per_restart", numbers(r.per_restart)}};
}

Json to_json(const DualityConsistency& r) {
  return {{"p", number(r.p)},
          {"alphas", numbers(r.alphas)},
          {"ap_half", numbers(r.ap_half)},
          {"ap_dual", numbers(r.ap_dual)},
          {"rh_dual", numbers(r.rh_dual)},
          {"monotone", r.monotone}};
}

Json to_json(const OffDiagonalTable& t) {
  Json rows = Json::array(), fits = Json::array();
  for (const PairRatio& p : t.rows)
    rows.push_back({{"s", number(p.s)},
                    {"r", number(p.r)},
                    {"center1", p.center1},
                    {"center2", p.center2},
                    {"distance", number(p.distance)},
                    {"ratio", number(p.ratio)},
                    {"adjoint_ratio", number(p.adjoint_ratio)}});
  for (const ScaleFit& f : t.fits)
    fits.push_back({{"s", number(f.s)},
                    {"r", number(f.r)},
                    {"pairs", f.pairs},
                    {"exponent", number(f.exponent)},
                    {"adjoint_exponent", number(f.adjoint_exponent)},
                    {"skipped", f.skipped}});
  return {{"rows", rows},
          {"fits", fits},
          {"min_exponent", number(t.min_exponent)},
          {"median_exponent", number(t.median_exponent)}};
}

Json to_json(const WeakBoundTable& t) {
  Json rows = Json::array();
  for (const WeakBoundRow& w : t.rows)
    rows.push_back({{"s", number(w.s)},
                    {"center1", w.center1},
                    {"center2", w.center2},
                    {"distance", number(w.distance)},
                    {"ratio", number(w.ratio)},
                    {"adjoint_ratio", number(w.adjoint_ratio)},
                    {"inner_k1", number(w.inner_k1)},
                    {"inner_k2", number(w.inner_k2)}});
  return {{"rows", rows}, {"max_ratio", number(t.max_ratio)}, {"median_ratio", number(t.median_ratio)},
          {"worst_spread", number(t.worst_spread)}};
}

Json to_json(const HypothesisReport& r) {
  Json out = {{"label", r.label},
              {"kappa", r.kappa},
              {"d_hom", number(r.d_hom)},
              {"exponent_threshold", number(r.exponent_threshold)},
              {"off_diagonal", to_json(r.off_diagonal)},
              {"weak_boundedness", to_json(r.weak_boundedness)},
              {"t1_bmo", to_json(r.t1.t1_bmo)},
              {"t1star_bmo", to_json(r.t1.t1_star_bmo)},
              {"kappa_oscillation", to_json(r.t1.kappa_oscillation)},
              {"l2_norm_estimate", number(r.l2.value)},
              {"l2_converged", r.l2.converged},
              {"l2_iterations", r.l2.iterations},
              {"adjoint_defect", number(r.adjoint_defect)},
              {"skipped_scales", r.skipped_scales},
              {"note", "T(1) and T*(1) are evaluated directly; on a finite space no truncation is needed"}};
  if (r.smoothness)
    out["kernel_smoothness"] = {{"exponent", number(r.smoothness->exponent)},
                                {"target", number(r.smoothness->target)},
                                {"samples", r.smoothness->samples},
                                {"pass", r.smoothness->pass}};
  const Verdict& v = r.verdict;
  out["verdict"] = {{"off_diagonal_pass", v.off_diagonal_pass},
                    {"weak_boundedness_pass", v.weak_boundedness_pass},
                    {"hypotheses_pass", v.hypotheses_pass},
                    {"l2_converged", v.l2_converged},
                    {"adjoint_consistent", v.adjoint_consistent},
                    {"flagged", v.flagged},
                    {"summary", v.summary}};
  return out;
}

std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::string text;
  for (std::size_t i = 0; i < table.header.size(); ++i) text += (i ? "," : "") + table.header[i];
  text += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + csv_cell(row[i]);
    text += "\n";
  }
  write_file(path, text);
}

}  // namespace sgcalc
