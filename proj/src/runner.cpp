#include "sgcalc/runner.hpp"

#include "sgcalc/error.hpp"
#include "sgcalc/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace sgcalc {
namespace {

std::string exponent_label(double p) {
  if (std::isinf(p)) return "inf";
  std::ostringstream s;
  s << p;
  return s.str();
}

// Relative to sup|g| * max|F| as well as the outputs: at very large t the
// exact action is ~0 and a purely output-relative error is roundoff over
// roundoff. The Chebyshev bound is uniform in g, so this is the fair scale.
double oracle_diff(const Block& a, const Block& b, const SpectralFunction& g, double u_max, const Block& F) {
  double sup = std::abs(g(0.0));
  for (int i = 0; i <= 400; ++i) sup = std::max(sup, std::abs(g(u_max * std::pow(10.0, -12.0 + 12.0 * i / 400.0))));
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), sup * F.cwiseAbs().maxCoeff()});
  return scale > 0.0 ? (a - b).cwiseAbs().maxCoeff() / scale : 0.0;
}

Vertex resolve_center(long long center, const Space& space) {
  if (center < 0) return central_vertex(space);
  if (static_cast<std::size_t>(center) >= space.size()) throw ConfigError("field center out of range");
  return static_cast<Vertex>(center);
}

SpacePtr make_space(const SpaceSpec& s) {
  if (s.family == "path") return path_graph(s.n, s.edge_length, s.vertex_measure);
  if (s.family == "cycle") return cycle_graph(s.n, s.edge_length, s.vertex_measure);
  if (s.family == "grid2d") return grid2d(s.nx, s.ny, s.edge_length, s.vertex_measure);
  return read_edge_list(s.file);
}

// Doubling dimension on a thinned radius grid; cheap enough to run per suite.
GeometryReport quick_geometry(const Space& space) {
  const std::vector<double> radii = thin_radii(positive_radii(space), 24);
  return measure_doubling(space, radii);
}

// Separated ball pairs around the central vertex at radius r.
std::vector<BallPair> central_pairs(const Space& space, double r, std::size_t cap) {
  const Vertex c = central_vertex(space);
  Ball q1 = make_ball(space, c, r);
  std::vector<BallPair> pairs;
  double last = -1.0;
  std::vector<Vertex> reps;
  for (Vertex v : space.by_distance(c)) {
    const double d = space.distance(c, v);
    if (d > radius_with_slack(last) && d >= 4.0 * r) reps.push_back(v);
    if (d > radius_with_slack(last)) last = d;
  }
  const std::size_t step = std::max<std::size_t>(1, (reps.size() + cap - 1) / std::max<std::size_t>(cap, 1));
  for (std::size_t i = 0; i < reps.size(); i += step) {
    Ball q2 = make_ball(space, reps[i], r);
    if (set_distance(space, q1.members, q2.members) >= 2.0 * r) pairs.push_back({q1, std::move(q2)});
  }
  return pairs;
}

FieldSpec field_spec(std::string kind, std::size_t count = 1) {
  FieldSpec f;
  f.kind = std::move(kind);
  f.count = count;
  return f;
}

void add(SuiteResult& res, const std::string& quantity, double value) {
  res.summary.push_back({res.suite, quantity, value});
}

// ---- suites -------------------------------------------------------------------

SuiteResult suite_geometry(const ExperimentConfig& cfg, const Workspace& ws) {
  SuiteResult res{"geometry", Json::object(), {}, {}, {}};
  const Space& space = *ws.space;
  const std::vector<double> radii = thin_radii(positive_radii(space), 48);
  const GeometryReport geo = measure_doubling(space, radii);
  const MetricCheck metric = check_metric(space, 500, 200000, cfg.seed);
  res.report["doubling"] = to_json(geo);
  res.report["metric"] = {{"symmetric", metric.symmetric},
                          {"zero_diagonal", metric.zero_diagonal},
                          {"triangle", metric.triangle},
                          {"triples_checked", metric.triples_checked},
                          {"worst_violation", number(metric.worst_violation)}};
  if (!metric.ok()) res.flags.push_back("metric axioms violated");

  Json poincare = Json::array();
  double worst = 0.0;
  const BallGradient grad = ball_gradient_fn(ws.generator);
  PoincareOptions popt;
  popt.seed = cfg.seed;
  popt.edge_weights = ws.generator->coefficients();
  const Vertex c = central_vertex(space);
  for (double r : {1.0, 2.0, 4.0, 8.0}) {
    if (r > space.diameter()) break;
    const Ball ball = make_ball(space, c, r * space.min_edge_length());
    const double C = poincare_constant(space, 2.0, ball, grad, popt);
    poincare.push_back({{"center", c}, {"radius", number(ball.radius)}, {"constant", number(C)}});
    worst = std::max(worst, C);
  }
  res.report["poincare_q2"] = poincare;

  Table t{"doubling_radii", {"radius", "saturated"}, {}};
  for (std::size_t i = 0; i < geo.radii.size(); ++i) t.rows.push_back({number(geo.radii[i]), bool(geo.saturated[i])});
  res.tables.push_back(t);
  add(res, "C0", geo.C0);
  add(res, "d_hom", geo.d_hom);
  add(res, "c_comp", geo.c_comp);
  add(res, "N_comp", geo.N_comp);
  add(res, "dilation_C", geo.dilation_C);
  add(res, "poincare_max", worst);
  return res;
}

SuiteResult suite_semigroup(const ExperimentConfig& cfg, const Workspace& ws) {
  SuiteResult res{"semigroup", Json::object(), {}, {}, {}};
  const Calculus& calc = ws.calc;
  const Field& mu = calc.measure();
  const auto n = static_cast<Eigen::Index>(ws.space->size());
  auto gen = substream(cfg.seed, "suite-semigroup");
  std::vector<NamedField> fields;
  for (const FieldSpec& fs : cfg.semigroup.fields)
    for (NamedField& f : make_fields(fs, ws, gen)) fields.push_back(std::move(f));
  if (fields.empty()) fields.push_back({"random-0", normal_field(gen, n)});

  std::vector<double> times = cfg.semigroup.times;
  if (times.empty())
    for (std::size_t j = 0; j < ws.grid.size(); j += 8) times.push_back(ws.grid.t_at(j));

  const SpectralFunction heat = fn::exp_neg();
  const Field one = Field::Ones(n);
  const Field g_probe = normal_field(gen, n);
  Table laws{"semigroup_laws",
             {"field", "t", "semigroup_defect", "conservation_defect", "self_adjoint_defect", "positivity_min"},
             {}};
  double worst_sg = 0.0, worst_cons = 0.0, worst_sa = 0.0, worst_pos = 0.0;
  Json applied = Json::array();
  for (const NamedField& f : fields) {
    const double fn2 = std::max(lp_norm(f.values, 2.0, mu), 1e-300);
    for (double t : times) {
      const Field h = calc.apply(heat, t, f.values);
      const double sg = lp_norm(Field(calc.apply(heat, 2.0 * t, f.values) - calc.apply(heat, t, h)), 2.0, mu) / fn2;
      const double cons = (calc.apply(heat, t, one) - one).cwiseAbs().maxCoeff();
      const double sa = std::abs(inner(h, g_probe, mu) - inner(f.values, calc.apply(heat, t, g_probe), mu)) /
                        (fn2 * lp_norm(g_probe, 2.0, mu));
      const Field habs = calc.apply(heat, t, Field(f.values.cwiseAbs()));
      const double pos = habs.minCoeff() / std::max(f.values.cwiseAbs().maxCoeff(), 1e-300);
      worst_sg = std::max(worst_sg, sg);
      worst_cons = std::max(worst_cons, cons);
      worst_sa = std::max(worst_sa, sa);
      worst_pos = std::min(worst_pos, pos);
      laws.rows.push_back({f.label, number(t), number(sg), number(cons), number(sa), number(pos)});
      if (n <= 64) applied.push_back({{"field", f.label}, {"t", number(t)}, {"heat", to_json(h)}});
    }
  }
  res.report["applied"] = applied;
  res.report["laws"] = {{"semigroup_defect", number(worst_sg)},
                        {"conservation_defect", number(worst_cons)},
                        {"self_adjoint_defect", number(worst_sa)},
                        {"positivity_min", number(worst_pos)}};
  if (worst_sg > 1e-8 || worst_cons > 1e-9 || worst_sa > 1e-9 || worst_pos < -1e-10)
    res.flags.push_back("semigroup laws outside tolerance");
  res.tables.push_back(laws);
  add(res, "semigroup_defect", worst_sg);
  add(res, "conservation_defect", worst_cons);
  add(res, "self_adjoint_defect", worst_sa);

  if (cfg.semigroup.oracle && ws.generator->dense_available()) {
    std::vector<SpectralFunction> funcs{heat, fn::psi(1), fn::psi(2), fn::resolvent_power(2)};
    for (int k : cfg.semigroup.k) funcs.push_back(fn::semigroup_derivative(k));
    Block F(n, static_cast<Eigen::Index>(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) F.col(static_cast<Eigen::Index>(i)) = fields[i].values;
    Table oracle{"oracle_equivalence", {"function", "t", "relative_difference"}, {}};
    double worst = 0.0;
    for (const SpectralFunction& g : funcs)
      for (double t : times) {
        const double d = oracle_diff(calc.apply(g, t, F, ActionPath::Dense),
                                     calc.apply(g, t, F, ActionPath::Chebyshev), g, t * ws.generator->lambda_max(), F);
        worst = std::max(worst, d);
        oracle.rows.push_back({g.name, number(t), number(d)});
      }
    res.tables.push_back(oracle);
    res.report["oracle_max_relative_difference"] = number(worst);
    if (worst > 1e-8) res.flags.push_back("dense and Chebyshev actions disagree");
    add(res, "oracle_max_relative_difference", worst);
  }

  const LimitsReport lim = limits_check(calc, fields.front().values, ws.grid, 1);
  res.report["limits"] = to_json(lim);

  const double r = std::max(ws.space->min_edge_length(), ws.space->diameter() / 10.0);
  const double s = std::pow(r, calc.generator().homogeneity());
  const std::vector<BallPair> pairs = central_pairs(*ws.space, r, 12);
  if (!pairs.empty()) {
    TransferOptions topt;
    topt.seed = cfg.seed;
    const DecayTable dh = off_diagonal_profile(calc, OperatorFamily::heat(), s, pairs, topt);
    const DecayTable dd = off_diagonal_profile(calc, OperatorFamily::derivative(1), s, pairs, topt);
    res.report["off_diagonal"] = {to_json(dh), to_json(dd)};
    add(res, "heat_decay_exponent", dh.fitted_exponent);
    add(res, "derivative_decay_exponent", dd.fitted_exponent);
  }

  const SobolevSweep sob = resolvent_sobolev_sweep(calc, s, cfg.semigroup.resolvent_power, fields.front().values);
  res.report["sobolev_resolvent"] = {{"t", number(s)},
                                     {"M", cfg.semigroup.resolvent_power},
                                     {"max_ratio", number(sob.max_ratio)},
                                     {"witness_center", sob.witness_center},
                                     {"radius", number(sob.radius)}};
  add(res, "sobolev_ratio", sob.max_ratio);

  const SquareFunctionResult sq =
      square_function(calc, fields.front().values, SquareFunctionVariant::holomorphic(fn::psi(1)), ws.grid);
  res.report["square_function"] = {{"l2_norm", number(sq.l2_norm)}, {"operator_norm", number(sq.operator_norm)}};
  add(res, "square_function_l2", sq.l2_norm);
  return res;
}

SuiteResult suite_bmo(const ExperimentConfig& cfg, const Workspace& ws) {
  SuiteResult res{"bmo", Json::object(), {}, {}, {}};
  auto gen = substream(cfg.seed, "suite-bmo");
  std::vector<NamedField> fields;
  std::vector<FieldSpec> specs = cfg.bmo.fields;
  if (specs.empty()) specs = {field_spec("random"), field_spec("log_distance")};
  for (const FieldSpec& fs : specs)
    for (NamedField& f : make_fields(fs, ws, gen)) fields.push_back(std::move(f));
  BmoOptions opt;
  opt.kappa = cfg.bmo.kappa;
  opt.l2_average = cfg.bmo.l2_average;
  Table t{"bmo", {"field", "bmo_l", "bmo_l_unsaturated", "bmo_classical"}, {}};
  Json reports = Json::array();
  for (const NamedField& f : fields) {
    const BmoReport b = bmo_l_norm(ws.calc, f.values, ws.grid, opt);
    const ClassicalBmo c = bmo_classical(*ws.space, f.values, thin_radii(positive_radii(*ws.space), 48));
    Json j = to_json(b);
    j["field"] = f.label;
    j["classical"] = {{"norm", number(c.norm)}, {"center", c.center}, {"radius", number(c.radius)}};
    reports.push_back(j);
    t.rows.push_back({f.label, number(b.norm), number(b.norm_unsaturated), number(c.norm)});
    add(res, "bmo_l[" + f.label + "]", b.norm);
    add(res, "bmo_classical[" + f.label + "]", c.norm);
  }
  res.report["fields"] = reports;
  res.tables.push_back(t);
  return res;
}

SuiteResult suite_carleson(const ExperimentConfig& cfg, const Workspace& ws) {
  SuiteResult res{"carleson", Json::object(), {}, {}, {}};
  auto gen = substream(cfg.seed, "suite-carleson");
  std::vector<FieldSpec> specs = cfg.carleson.fields;
  if (specs.empty()) specs = {field_spec("random", 8)};
  std::vector<NamedField> fields;
  for (const FieldSpec& fs : specs)
    for (NamedField& f : make_fields(fs, ws, gen)) fields.push_back(std::move(f));
  Block F(static_cast<Eigen::Index>(ws.space->size()), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) F.col(static_cast<Eigen::Index>(i)) = fields[i].values;
  const std::vector<BmoReport> bmo = bmo_l_norms(ws.calc, F, ws.grid);
  Table t{"carleson", {"field", "k", "carleson", "bmo_l", "ratio"}, {}};
  Json out = Json::array();
  for (int k : cfg.carleson.k) {
    const std::vector<CarlesonReport> car = carleson_norms(ws.calc, F, k, ws.grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const double b2 = bmo[i].norm * bmo[i].norm;
      const double ratio = b2 > 0.0 ? car[i].norm / b2 : 0.0;
      worst = std::max(worst, ratio);
      t.rows.push_back({fields[i].label, k, number(car[i].norm), number(bmo[i].norm), number(ratio)});
      Json j = to_json(car[i]);
      j["field"] = fields[i].label;
      j["bmo_l"] = number(bmo[i].norm);
      j["ratio"] = number(ratio);
      out.push_back(j);
    }
    add(res, "carleson_over_bmo2_k" + std::to_string(k), worst);
  }
  res.report["fields"] = out;
  res.tables.push_back(t);
  return res;
}

Weight make_weight(const WeightSpec& w, const Space& space) {
  if (w.family == "constant") return constant_weight(space, w.c);
  if (w.family == "checkerboard") return checkerboard_weight(space, w.a, w.b);
  return power_weight(space, w.alpha, central_vertex(space));
}

SuiteResult suite_paraproduct(const ExperimentConfig& cfg, const Workspace& ws) {
  SuiteResult res{"paraproduct", Json::object(), {}, {}, {}};
  const Calculus& calc = ws.calc;
  const Field& mu = calc.measure();
  const auto n = static_cast<Eigen::Index>(ws.space->size());
  const GeometryReport geo = quick_geometry(*ws.space);
  const CalculusPair cp = cfg.paraproduct.order > 0
                              ? CalculusPair::with_order(cfg.paraproduct.order)
                              : CalculusPair::for_dimension(geo.d_hom, calc.generator().homogeneity());
  res.report["N"] = cp.N;
  res.report["d_hom"] = number(geo.d_hom);
  auto gen = substream(cfg.seed, "suite-paraproduct");

  if (cfg.paraproduct.residuals) {
    Field f = normal_field(gen, n), g = normal_field(gen, n);
    f.array() -= constant_part(f, mu);
    g.array() -= constant_part(g, mu);
    const double rr = reproducing_residual(calc, f, ws.grid);
    const ProductDecomposition pd = product_decomposition(calc, f, g, ws.grid);
    const TrilinearResult l1 = lambda1(calc, cp, normal_field(gen, n), f, g, ws.grid);
    res.report["reproducing_residual"] = number(rr);
    res.report["product_residual"] = number(pd.residual_norm);
    res.report["lambda1"] = {{"value", number(l1.value)},
                             {"quadrature_error_estimate", number(l1.quadrature_error_estimate)}};
    add(res, "reproducing_residual", rr);
    add(res, "product_residual", pd.residual_norm);
  }

  std::vector<std::pair<std::string, std::optional<Weight>>> variants{{"", std::nullopt}};
  if (cfg.paraproduct.weight) variants.push_back({"weighted-", make_weight(*cfg.paraproduct.weight, *ws.space)});

  Table t{"mixed_norms", {"operator", "weighted", "p", "q", "r", "estimate", "converged", "iterations"}, {}};
  Json out = Json::array();
  for (const auto& [prefix, weight] : variants) {
    for (const std::string& op : cfg.paraproduct.operators) {
      BilinearAction B;
      if (op == "pi1") {
        B.forward = [&](const Block& H, const Block& F) { return paraproduct_pi1(calc, cp, H, F, ws.grid); };
        B.adjoint_f = [&](const Block& H, const Block& G) { return pi1_adjoint_f(calc, cp, H, G, ws.grid); };
        B.adjoint_h = [&](const Block& F, const Block& G) { return pi1_adjoint_h(calc, cp, F, G, ws.grid); };
      } else {
        B.forward = [&](const Block& H, const Block& F) { return paraproduct_pi2(calc, cp, H, F, ws.grid); };
        B.adjoint_f = [&](const Block& H, const Block& G) { return pi2_adjoint_f(calc, cp, H, G, ws.grid); };
        B.adjoint_h = [&](const Block& F, const Block& G) { return pi2_adjoint_h(calc, cp, F, G, ws.grid); };
      }
      for (const ExponentTriple& tr : cfg.paraproduct.triples) {
        MixedNormOptions opt;
        opt.restarts = cfg.paraproduct.restarts;
        opt.max_iterations = cfg.paraproduct.max_iterations;
        opt.tolerance = cfg.paraproduct.tolerance;
        opt.seed = splitmix64(cfg.seed ^ label_hash(prefix + op));
        if (weight) opt.weight = weight->values;
        const MixedNormResult mn = mixed_norm_estimate(B, mu, tr.p, tr.q, tr.r, opt);
        const std::string key = prefix + op + "_" + exponent_label(tr.p) + "_" + exponent_label(tr.q) + "_" +
                                exponent_label(tr.r);
        Json j = to_json(mn);
        j["operator"] = op;
        j["weighted"] = bool(weight);
        j["p"] = exponent_label(tr.p);
        j["q"] = exponent_label(tr.q);
        j["r"] = exponent_label(tr.r);
        out.push_back(j);
        t.rows.push_back({op, bool(weight), exponent_label(tr.p), exponent_label(tr.q), exponent_label(tr.r),
                          number(mn.estimate), mn.converged, mn.iterations});
        add(res, key, mn.estimate);
      }
    }
  }
  res.report["mixed_norms"] = out;
  res.tables.push_back(t);
  return res;
}

SuiteResult suite_weights(const ExperimentConfig& cfg, const Workspace& ws) {
  SuiteResult res{"weights", Json::object(), {}, {}, {}};
  const Space& space = *ws.space;
  std::vector<WeightSpec> specs = cfg.weights.weights;
  if (specs.empty()) {
    WeightSpec checker;
    checker.family = "checkerboard";
    specs = {WeightSpec{}, checker};
  }
  const std::vector<double> radii = thin_radii(positive_radii(space), 48);
  Table t{"weights", {"weight", "kind", "exponent", "characteristic"}, {}};
  Json out = Json::array();
  for (const WeightSpec& spec : specs) {
    const Weight w = make_weight(spec, space);
    validate_weight(space, w);
    Json j = {{"name", w.name}};
    for (double p : cfg.weights.p) {
      if (!(p > 1.0)) throw ConfigError("weights.p entries must exceed 1");
      const double a = ap_characteristic(space, w, p, radii);
      j["A_" + exponent_label(p)] = number(a);
      t.rows.push_back({w.name, "A_p", number(p), number(a)});
      add(res, "A_" + exponent_label(p) + "[" + w.name + "]", a);
    }
    for (double q : cfg.weights.q) {
      const double a = rh_characteristic(space, w, q, radii);
      j["RH_" + exponent_label(q)] = number(a);
      t.rows.push_back({w.name, "RH_q", number(q), number(a)});
      add(res, "RH_" + exponent_label(q) + "[" + w.name + "]", a);
    }
    out.push_back(j);
  }
  res.report["weights"] = out;
  if (cfg.weights.duality_p > 2.0) {
    const DualityConsistency dc =
        duality_consistency(space, cfg.weights.duality_p, cfg.weights.alphas, central_vertex(space), radii);
    res.report["duality"] = to_json(dc);
    if (!dc.monotone) res.flags.push_back("duality orderings disagree");
  }
  res.tables.push_back(t);
  return res;
}

SuiteResult suite_t1(const ExperimentConfig& cfg, const Workspace& ws) {
  SuiteResult res{"t1-check", Json::object(), {}, {}, {}};
  const T1Spec& spec = cfg.t1;
  const Space& space = *ws.space;
  const Field& mu = space.measure();
  const auto n = static_cast<Eigen::Index>(space.size());
  auto gen = substream(cfg.seed, "suite-t1");
  const GeometryReport geo = quick_geometry(space);
  HarnessOptions harness = spec.harness;
  harness.seed = cfg.seed;
  harness.transfer.seed = cfg.seed;

  if (spec.operator_kind == "random") {
    // Reverse direction: normalized random operators and the oscillation of T(1).
    Table t{"t1_random", {"operator", "l2_norm", "oscillation", "t1_bmo", "t1star_bmo"}, {}};
    double worst = 0.0;
    Json out = Json::array();
    for (std::size_t i = 0; i < spec.random_count; ++i) {
      OperatorUnderTest T = OperatorUnderTest::from_matrix(normal_block(gen, n, n), mu, "random-" + std::to_string(i));
      const L2Estimate est = estimate_l2_norm(T, mu, cfg.seed);
      T = T.scaled(1.0 / est.value);
      const T1Result r = compute_t1(T, ws.calc, ws.grid, 1);
      worst = std::max(worst, r.kappa_oscillation.norm);
      t.rows.push_back({T.label, number(1.0), number(r.kappa_oscillation.norm), number(r.t1_bmo.norm),
                        number(r.t1_star_bmo.norm)});
      out.push_back({{"label", T.label},
                     {"raw_l2_norm", number(est.value)},
                     {"l2_converged", est.converged},
                     {"oscillation", number(r.kappa_oscillation.norm)},
                     {"t1star_bmo", number(r.t1_star_bmo.norm)}});
    }
    res.report["random_operators"] = out;
    res.report["max_oscillation"] = number(worst);
    res.tables.push_back(t);
    add(res, "max_oscillation", worst);
    return res;
  }

  OperatorUnderTest T;
  const std::string& kind = spec.operator_kind;
  if (kind == "riesz" || kind == "sign" || kind == "zero") {
    KernelSpec ks;
    ks.profile = kind == "riesz" ? KernelSpec::Profile::Riesz
                 : kind == "sign" ? KernelSpec::Profile::Sign
                                  : KernelSpec::Profile::Zero;
    ks.gamma = spec.gamma;
    ks.truncation = spec.truncation;
    ks.taper = spec.taper;
    ks.diagonal = spec.diagonal == "zero"     ? KernelSpec::Diagonal::Zero
                  : spec.diagonal == "cancel" ? KernelSpec::Diagonal::Cancel
                                              : KernelSpec::Diagonal::Prescribed;
    if (ks.diagonal == KernelSpec::Diagonal::Prescribed) ks.prescribed = make_fields(spec.field, ws, gen).front().values;
    T = make_cz_operator(space, ks);
  } else if (kind == "identity") {
    T = OperatorUnderTest::identity(space.size());
  } else if (kind == "semigroup") {
    T = OperatorUnderTest::semigroup(ws.calc, spec.s0);
  } else if (kind == "multiplication") {
    T = OperatorUnderTest::multiplication(make_fields(spec.field, ws, gen).front().values);
  } else if (kind == "paraproduct") {
    const CalculusPair cp = CalculusPair::for_dimension(geo.d_hom, ws.generator->homogeneity());
    T = OperatorUnderTest::paraproduct(ws.calc, cp, make_fields(spec.field, ws, gen).front().values, ws.grid);
  } else {
    std::ifstream in(spec.csv);
    if (!in) throw ConfigError("cannot open kernel csv " + spec.csv);
    T = OperatorUnderTest::from_matrix(read_kernel_csv(in, space.size()), mu, "csv");
  }
  T.kappa = spec.kappa;

  const HypothesisReport rep = t1_report(T, ws.calc, ws.grid, geo.d_hom, spec.thresholds, harness);
  res.report = to_json(rep);
  if (rep.verdict.flagged) res.flags.push_back("t1: " + rep.verdict.summary);

  Table od{"t1_off_diagonal", {"s", "r", "center1", "center2", "distance", "ratio", "adjoint_ratio"}, {}};
  for (const PairRatio& p : rep.off_diagonal.rows)
    od.rows.push_back({number(p.s), number(p.r), p.center1, p.center2, number(p.distance), number(p.ratio),
                       number(p.adjoint_ratio)});
  Table wb{"t1_weak_boundedness", {"s", "center1", "center2", "distance", "ratio", "adjoint_ratio", "inner_k1",
                                   "inner_k2"}, {}};
  for (const WeakBoundRow& w : rep.weak_boundedness.rows)
    wb.rows.push_back({number(w.s), w.center1, w.center2, number(w.distance), number(w.ratio),
                       number(w.adjoint_ratio), number(w.inner_k1), number(w.inner_k2)});
  res.tables.push_back(od);
  res.tables.push_back(wb);
  add(res, "min_decay_exponent", rep.off_diagonal.min_exponent);
  add(res, "weak_bound_max", rep.weak_boundedness.max_ratio);
  add(res, "t1_bmo", rep.t1.t1_bmo.norm);
  add(res, "t1star_bmo", rep.t1.t1_star_bmo.norm);
  add(res, "kappa_oscillation", rep.t1.kappa_oscillation.norm);
  add(res, "l2_norm", rep.l2.value);
  return res;
}

// ---- output -----------------------------------------------------------------

std::string iso_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

Table summary_table(const std::vector<std::pair<std::size_t, const SuiteResult*>>& results) {
  Table t{"summary", {"suite", "level", "quantity", "value"}, {}};
  for (const auto& [level, r] : results)
    for (const SummaryRow& row : r->summary)
      t.rows.push_back({row.suite, level ? Json(level) : Json(nullptr), row.quantity, number(row.value)});
  return t;
}

Json suite_json(const SuiteResult& r) {
  Json j = r.report;
  j["flags"] = r.flags;
  return j;
}

}  // namespace

// ---- public -------------------------------------------------------------------

Workspace build_workspace(const ExperimentConfig& cfg) {
  SpacePtr space = make_space(cfg.space);
  std::vector<double> coeffs;
  if (cfg.generator.kind == GeneratorKind::DivergenceForm) {
    const std::size_t ne = space->edges().size();
    if (cfg.generator.coefficients == "values") {
      if (cfg.generator.values.size() != ne)
        throw ConfigError("generator.values: expected " + std::to_string(ne) + " coefficients");
      coeffs = cfg.generator.values;
    } else if (cfg.generator.coefficients == "uniform") {
      auto gen = substream(cfg.seed, "generator-coefficients");
      NormalSampler u(gen);
      for (std::size_t e = 0; e < ne; ++e)
        coeffs.push_back(cfg.generator.low + (cfg.generator.high - cfg.generator.low) * u.uniform());
    } else {
      coeffs.assign(ne, 1.0);
    }
  }
  GeneratorPtr g = Generator::assemble(space, cfg.generator.kind, coeffs, cfg.generator.m);
  Calculus calc(g);
  ScaleGrid grid = ScaleGrid::for_generator(*g, cfg.grid);
  return {space, g, calc, grid};
}

std::vector<NamedField> make_fields(const FieldSpec& spec, const Workspace& ws, std::mt19937_64& gen) {
  const Space& space = *ws.space;
  const auto n = static_cast<Eigen::Index>(space.size());
  const Field& mu = space.measure();
  std::vector<NamedField> out;
  const std::string& k = spec.kind;
  if (k == "random" || k == "random_mean_zero") {
    for (std::size_t i = 0; i < spec.count; ++i) {
      Field f = normal_field(gen, n);
      if (k == "random_mean_zero") f.array() -= constant_part(f, mu);
      out.push_back({k + "-" + std::to_string(i), f});
    }
    return out;
  }
  Field f(n);
  if (k == "values") {
    if (static_cast<Eigen::Index>(spec.values.size()) != n)
      throw ConfigError("field values: expected " + std::to_string(n) + " entries");
    for (Eigen::Index i = 0; i < n; ++i) f[i] = spec.values[static_cast<std::size_t>(i)];
  } else if (k == "constant") {
    f.setConstant(spec.value);
  } else if (k == "eigenvector") {
    const Eigensystem& eig = ws.generator->eigensystem();
    if (static_cast<Eigen::Index>(spec.index) >= n) throw ConfigError("eigenvector index out of range");
    f = eig.vectors.col(static_cast<Eigen::Index>(spec.index));
  } else if (k == "indicator") {
    f.setZero();
    for (Vertex v : space.ball_members(resolve_center(spec.center, space), spec.radius)) f[v] = 1.0;
  } else if (k == "log_distance" || k == "oscillating") {
    const Vertex c = resolve_center(spec.center, space);
    const double unit = space.min_edge_length();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = space.distance(c, static_cast<Vertex>(i));
      double v = std::pow(std::log1p(d / unit), spec.power);
      if (k == "oscillating" && std::llround(d / unit) % 2) v = -v;
      f[i] = v;
    }
  } else {  // coordinate
    for (Eigen::Index i = 0; i < n; ++i)
      f[i] = space.has_coordinates() ? space.coordinates()[static_cast<std::size_t>(i)][0] : static_cast<double>(i);
  }
  out.push_back({k, f});
  return out;
}

SuiteResult run_suite(const std::string& suite, const ExperimentConfig& config) {
  const Workspace ws = build_workspace(config);
  if (suite == "geometry") return suite_geometry(config, ws);
  if (suite == "semigroup") return suite_semigroup(config, ws);
  if (suite == "bmo") return suite_bmo(config, ws);
  if (suite == "carleson") return suite_carleson(config, ws);
  if (suite == "paraproduct") return suite_paraproduct(config, ws);
  if (suite == "weights") return suite_weights(config, ws);
  if (suite == "t1-check") return suite_t1(config, ws);
  throw ConfigError("unknown suite '" + suite + "'");
}

SweepResult run_sweep(const ExperimentConfig& config, const std::vector<std::size_t>& levels) {
  if (levels.size() < 2) throw ConfigError("a sweep needs at least two refinement levels");
  SweepResult out;
  out.levels = levels;
  for (std::size_t level : levels) out.per_level.push_back(run_suite(config.sweep.suite, at_level(config, level)));
  // Quantities in first-seen order; a quantity missing at some level gets NaN.
  std::vector<std::string> names;
  for (const SuiteResult& r : out.per_level)
    for (const SummaryRow& row : r.summary)
      if (std::find(names.begin(), names.end(), row.quantity) == names.end()) names.push_back(row.quantity);
  for (const std::string& q : names) {
    StabilityRow row;
    row.quantity = q;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const SuiteResult& r : out.per_level) {
      double v = std::numeric_limits<double>::quiet_NaN();
      for (const SummaryRow& s : r.summary)
        if (s.quantity == q) v = s.value;
      row.values.push_back(v);
      lo = std::min(lo, std::abs(v));
      hi = std::max(hi, std::abs(v));
    }
    row.ratio = hi == 0.0 ? 1.0 : (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
    if (std::any_of(row.values.begin(), row.values.end(), [](double v) { return std::isnan(v); }))
      row.ratio = std::numeric_limits<double>::quiet_NaN();
    row.flagged = !(row.ratio - 1.0 <= config.sweep.max_drift);
    out.stability.push_back(row);
  }
  return out;
}

int run_cli(const CliRequest& request, std::ostream& log, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = iso_now();
  try {
    ExperimentConfig cfg = request.config ? load_config(*request.config) : parse_config("{}");
    if (request.seed) set_seed(cfg, *request.seed);

    Json report = {{"tool", "sgcalc"}, {"command", request.command}, {"config", cfg.echo}};
    std::vector<Table> tables;
    std::vector<std::string> flags;
    std::vector<std::pair<std::size_t, const SuiteResult*>> for_summary;
    std::vector<SuiteResult> results;
    std::optional<SweepResult> sweep;

    if (request.command == "sweep") {
      std::vector<std::size_t> levels = request.levels.empty() ? cfg.sweep.levels : request.levels;
      log << "sweep " << cfg.sweep.suite << " over " << levels.size() << " levels\n";
      sweep = run_sweep(cfg, levels);
      Json lv = Json::array();
      for (std::size_t i = 0; i < sweep->levels.size(); ++i) {
        const SuiteResult& r = sweep->per_level[i];
        lv.push_back({{"level", sweep->levels[i]}, {"report", suite_json(r)}});
        for_summary.push_back({sweep->levels[i], &r});
        for (const Table& t : r.tables) {
          Table copy = t;
          copy.name = t.name + "_level" + std::to_string(sweep->levels[i]);
          tables.push_back(std::move(copy));
        }
        for (const std::string& f : r.flags) flags.push_back("level " + std::to_string(sweep->levels[i]) + ": " + f);
      }
      Table st{"sweep", {"quantity", "level", "value", "stability_ratio", "flagged"}, {}};
      Json stab = Json::array();
      for (const StabilityRow& row : sweep->stability) {
        for (std::size_t i = 0; i < row.values.size(); ++i)
          st.rows.push_back({row.quantity, sweep->levels[i], number(row.values[i]), number(row.ratio), row.flagged});
        stab.push_back({{"quantity", row.quantity},
                        {"values", [&] {
                           Json a = Json::array();
                           for (double v : row.values) a.push_back(number(v));
                           return a;
                         }()},
                        {"stability_ratio", number(row.ratio)},
                        {"flagged", row.flagged}});
        if (row.flagged) flags.push_back("drift above " + std::to_string(cfg.sweep.max_drift) + ": " + row.quantity);
      }
      tables.push_back(st);
      report["sweep"] = {{"suite", cfg.sweep.suite},
                         {"levels", sweep->levels},
                         {"max_drift", number(cfg.sweep.max_drift)},
                         {"stability", stab},
                         {"per_level", lv}};
    } else {
      std::vector<std::string> suites;
      if (request.command == "run") {
        suites = cfg.suites;
        if (suites.empty()) throw ConfigError("'run' needs a non-empty suites list in the config");
      } else {
        suites = {request.command};
      }
      for (const std::string& s : suites) {
        log << "suite " << s << "\n";
        results.push_back(run_suite(s, cfg));
      }
      Json js = Json::object();
      for (const SuiteResult& r : results) {
        js[r.suite] = suite_json(r);
        for_summary.push_back({0, &r});
        tables.insert(tables.end(), r.tables.begin(), r.tables.end());
        for (const std::string& f : r.flags) flags.push_back(r.suite + ": " + f);
      }
      report["suites"] = js;
    }
    report["flags"] = flags;
    report["verdict"] = flags.empty() ? "ok" : "flagged";

    std::filesystem::create_directories(request.out / "tables");
    write_file(request.out / "report.json", report.dump(2) + "\n");
    for (const Table& t : tables) write_csv(t, request.out / "tables" / (t.name + ".csv"));
    write_csv(summary_table(for_summary), request.out / "summary.csv");
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const Json meta = {{"started", started_at}, {"finished", iso_now()}, {"elapsed_seconds", elapsed},
                       {"command", request.command}};
    write_file(request.out / "meta.json", meta.dump(2) + "\n");
    for (const std::string& f : flags) log << "flagged: " << f << "\n";
    return flags.empty() ? 0 : 2;
  } catch (const std::exception& e) {
    err << "sgcalc: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sgcalc
