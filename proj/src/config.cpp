#include "sgcalc/config.hpp"

#include "sgcalc/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sgcalc {
namespace {

using nlohmann::json;

// Line of the first occurrence of "key" in the source, 0 when absent.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n')) + 1;
}

struct Context {
  const std::string& text;
  const std::string& source;

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    const std::string key = path.substr(path.find_last_of('.') + 1);
    const std::size_t line = line_of_key(text, key.substr(0, key.find('[')));
    std::ostringstream out;
    out << source;
    if (line) out << ":" << line;
    out << ": field '" << path << "': " << msg;
    throw ConfigError(out.str());
  }
};

// A JSON object whose keys must all be consumed.
class Obj {
 public:
  Obj(const Context& ctx, const json& j, std::string path) : ctx_(ctx), j_(j), path_(std::move(path)) {
    if (!j_.is_object()) ctx_.fail(path_, "expected an object");
  }
  ~Obj() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) ctx_.fail(sub(it.key()), "unknown key");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }
  const json& at(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const Context& ctx() const { return ctx_; }

  double number(const std::string& key, double def) { return has(key) ? to_number(at(key), sub(key)) : def; }
  std::uint64_t uint(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_number_unsigned()) ctx_.fail(sub(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  long long integer(const std::string& key, long long def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_number_integer()) ctx_.fail(sub(key), "expected an integer");
    return v.get<long long>();
  }
  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_boolean()) ctx_.fail(sub(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& def, std::initializer_list<const char*> allowed = {}) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_string()) ctx_.fail(sub(key), "expected a string");
    std::string s = v.get<std::string>();
    if (allowed.size()) {
      bool ok = false;
      std::string list;
      for (const char* a : allowed) {
        ok = ok || s == a;
        list += (list.empty() ? "" : ", ") + std::string(a);
      }
      if (!ok) ctx_.fail(sub(key), "'" + s + "' is not one of " + list);
    }
    return s;
  }
  template <class F>
  void array(const std::string& key, F&& each) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array()) ctx_.fail(sub(key), "expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) each(v[i], sub(key) + "[" + std::to_string(i) + "]");
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    if (!has(key)) return def;
    std::vector<double> out;
    array(key, [&](const json& v, const std::string& p) { out.push_back(to_number(v, p)); });
    return out;
  }

  double to_number(const json& v, const std::string& path) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    }
    ctx_.fail(path, "expected a number (or \"inf\")");
  }

 private:
  const Context& ctx_;
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void positive(const Context& ctx, const std::string& path, double v) {
  if (!(v > 0.0)) ctx.fail(path, "must be positive");
}

FieldSpec parse_field(const Context& ctx, const json& j, const std::string& path) {
  Obj o(ctx, j, path);
  FieldSpec f;
  f.kind = o.string("kind", f.kind,
                    {"values", "constant", "random", "random_mean_zero", "eigenvector", "indicator", "log_distance",
                     "coordinate", "oscillating"});
  f.count = o.uint("count", f.count);
  f.value = o.number("value", f.value);
  f.index = o.uint("index", f.index);
  f.values = o.numbers("values", {});
  f.center = o.integer("center", f.center);
  f.radius = o.number("radius", f.radius);
  f.power = o.number("power", f.power);
  if (f.kind == "values" && f.values.empty()) ctx.fail(o.sub("values"), "required for kind 'values'");
  if (f.count == 0) ctx.fail(o.sub("count"), "must be at least 1");
  return f;
}

std::vector<FieldSpec> parse_fields(Obj& o, const std::string& key) {
  std::vector<FieldSpec> out;
  o.array(key, [&](const json& v, const std::string& p) { out.push_back(parse_field(o.ctx(), v, p)); });
  return out;
}

WeightSpec parse_weight(const Context& ctx, const json& j, const std::string& path) {
  Obj o(ctx, j, path);
  WeightSpec w;
  w.family = o.string("family", w.family, {"constant", "power", "checkerboard"});
  w.alpha = o.number("alpha", w.alpha);
  w.a = o.number("a", w.a);
  w.b = o.number("b", w.b);
  w.c = o.number("c", w.c);
  return w;
}

void parse_space(Obj& o, SpaceSpec& s) {
  s.family = o.string("family", s.family, {"path", "cycle", "grid2d", "file"});
  s.n = o.uint("n", s.n);
  s.nx = o.uint("nx", s.nx);
  s.ny = o.uint("ny", s.ny);
  s.edge_length = o.number("edge_length", s.edge_length);
  s.vertex_measure = o.number("vertex_measure", s.vertex_measure);
  s.file = o.string("file", s.file);
  positive(o.ctx(), o.sub("edge_length"), s.edge_length);
  positive(o.ctx(), o.sub("vertex_measure"), s.vertex_measure);
  if (s.family == "file" && s.file.empty()) o.ctx().fail(o.sub("file"), "required for family 'file'");
}

void parse_generator(Obj& o, GeneratorSpec& g) {
  const std::string kind = o.string("kind", to_string(g.kind), {"combinatorial", "divergence-form", "divergence"});
  g.kind = generator_kind_from_string(kind);
  g.m = o.number("m", g.m);
  positive(o.ctx(), o.sub("m"), g.m);
  g.coefficients = o.string("coefficients", g.coefficients, {"ones", "uniform", "values"});
  g.low = o.number("low", g.low);
  g.high = o.number("high", g.high);
  g.values = o.numbers("values", {});
  if (g.coefficients == "uniform" && !(g.low > 0.0 && g.high >= g.low))
    o.ctx().fail(o.sub("low"), "need 0 < low <= high");
}

void parse_grid(Obj& o, ScaleGridParams& g) {
  g.rho = o.number("rho", g.rho);
  g.alpha = o.number("alpha", g.alpha);
  g.beta = o.number("beta", g.beta);
  if (!(g.rho > 1.0)) o.ctx().fail(o.sub("rho"), "must exceed 1");
  positive(o.ctx(), o.sub("alpha"), g.alpha);
  positive(o.ctx(), o.sub("beta"), g.beta);
}

std::vector<int> ints(Obj& o, const std::string& key, std::vector<int> def, int min) {
  if (!o.has(key)) return def;
  std::vector<int> out;
  o.array(key, [&](const json& v, const std::string& p) {
    if (!v.is_number_integer() || v.get<long long>() < min)
      o.ctx().fail(p, "expected an integer >= " + std::to_string(min));
    out.push_back(v.get<int>());
  });
  return out;
}

void parse_paraproduct(Obj& o, ParaproductSpec& s) {
  if (o.has("operators")) {
    s.operators.clear();
    o.array("operators", [&](const json& v, const std::string& p) {
      if (!v.is_string() || (v != "pi1" && v != "pi2")) o.ctx().fail(p, "expected \"pi1\" or \"pi2\"");
      s.operators.push_back(v.get<std::string>());
    });
  }
  if (o.has("triples")) s.triples.clear();
  o.array("triples", [&](const json& v, const std::string& p) {
    if (!v.is_array() || v.size() != 3) o.ctx().fail(p, "expected [p, q, r]");
    ExponentTriple t{o.to_number(v[0], p + "[0]"), o.to_number(v[1], p + "[1]"), o.to_number(v[2], p + "[2]")};
    if (!(t.p > 1.0) || !(t.q > 1.0)) o.ctx().fail(p, "p and q must exceed 1");
    if (!(t.r > 0.5) || std::isinf(t.r)) o.ctx().fail(p, "r must be finite and exceed 1/2");
    s.triples.push_back(t);
  });
  s.restarts = o.uint("restarts", s.restarts);
  s.max_iterations = o.uint("max_iterations", s.max_iterations);
  s.tolerance = o.number("tolerance", s.tolerance);
  if (o.has("weight")) s.weight = parse_weight(o.ctx(), o.at("weight"), o.sub("weight"));
  s.order = static_cast<int>(o.integer("order", s.order));
  s.residuals = o.boolean("residuals", s.residuals);
}

void parse_t1(Obj& o, T1Spec& s) {
  s.operator_kind = o.string("operator", s.operator_kind,
                             {"riesz", "sign", "zero", "identity", "semigroup", "multiplication", "paraproduct",
                              "random", "csv"});
  s.gamma = o.number("gamma", s.gamma);
  s.diagonal = o.string("diagonal", s.diagonal, {"zero", "cancel", "prescribed"});
  s.truncation = o.number("truncation", s.truncation);
  s.taper = o.number("taper", s.taper);
  s.s0 = o.number("s0", s.s0);
  if (o.has("field")) s.field = parse_field(o.ctx(), o.at("field"), o.sub("field"));
  s.csv = o.string("csv", s.csv);
  s.random_count = o.uint("random_count", s.random_count);
  s.kappa = static_cast<int>(o.integer("kappa", s.kappa));
  if (s.kappa < 1) o.ctx().fail(o.sub("kappa"), "must be >= 1");
  if (o.has("thresholds")) {
    Obj t(o.ctx(), o.at("thresholds"), o.sub("thresholds"));
    s.thresholds.exponent_margin = t.number("exponent_margin", s.thresholds.exponent_margin);
    s.thresholds.near_ratio_factor = t.number("near_ratio_factor", s.thresholds.near_ratio_factor);
    s.thresholds.smoothness_exponent = t.number("smoothness_exponent", s.thresholds.smoothness_exponent);
  }
  if (o.has("harness")) {
    Obj h(o.ctx(), o.at("harness"), o.sub("harness"));
    s.harness.scale_stride = h.uint("scale_stride", s.harness.scale_stride);
    s.harness.q1_random = h.uint("q1_random", s.harness.q1_random);
    s.harness.q2_cap = h.uint("q2_cap", s.harness.q2_cap);
    s.harness.max_radius_fraction = h.number("max_radius_fraction", s.harness.max_radius_fraction);
    s.harness.transfer.exact_limit = h.uint("exact_limit", s.harness.transfer.exact_limit);
    s.harness.transfer.probes = h.uint("probes", s.harness.transfer.probes);
  }
  if (s.operator_kind == "csv" && s.csv.empty()) o.ctx().fail(o.sub("csv"), "required for operator 'csv'");
}

const std::set<std::string>& suite_names() {
  static const std::set<std::string> names{"geometry", "semigroup", "bmo", "carleson", "paraproduct", "weights",
                                           "t1-check"};
  return names;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
    const auto line = std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n') + 1;
    throw ConfigError(source + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
  const Context ctx{text, source};
  ExperimentConfig cfg;
  {
    Obj root(ctx, doc, "");
    cfg.seed = root.uint("seed", cfg.seed);
    root.array("suites", [&](const json& v, const std::string& p) {
      if (!v.is_string() || !suite_names().count(v.get<std::string>())) ctx.fail(p, "unknown suite");
      cfg.suites.push_back(v.get<std::string>());
    });
    if (root.has("space")) {
      Obj o(ctx, root.at("space"), "space");
      parse_space(o, cfg.space);
    }
    if (root.has("generator")) {
      Obj o(ctx, root.at("generator"), "generator");
      parse_generator(o, cfg.generator);
    }
    if (root.has("grid")) {
      Obj o(ctx, root.at("grid"), "grid");
      parse_grid(o, cfg.grid);
    }
    if (root.has("semigroup")) {
      Obj o(ctx, root.at("semigroup"), "semigroup");
      cfg.semigroup.times = o.numbers("times", {});
      for (double t : cfg.semigroup.times)
        if (!(t >= 0.0)) ctx.fail("semigroup.times", "times must be >= 0");
      cfg.semigroup.fields = parse_fields(o, "fields");
      cfg.semigroup.k = ints(o, "k", cfg.semigroup.k, 0);
      cfg.semigroup.resolvent_power = static_cast<int>(o.integer("resolvent_power", cfg.semigroup.resolvent_power));
      cfg.semigroup.oracle = o.boolean("oracle", cfg.semigroup.oracle);
    }
    if (root.has("bmo")) {
      Obj o(ctx, root.at("bmo"), "bmo");
      cfg.bmo.fields = parse_fields(o, "fields");
      cfg.bmo.kappa = static_cast<int>(o.integer("kappa", cfg.bmo.kappa));
      cfg.bmo.l2_average = o.boolean("l2_average", cfg.bmo.l2_average);
    }
    if (root.has("carleson")) {
      Obj o(ctx, root.at("carleson"), "carleson");
      cfg.carleson.fields = parse_fields(o, "fields");
      cfg.carleson.k = ints(o, "k", cfg.carleson.k, 1);
    }
    if (root.has("paraproduct")) {
      Obj o(ctx, root.at("paraproduct"), "paraproduct");
      parse_paraproduct(o, cfg.paraproduct);
    }
    if (root.has("weights")) {
      Obj o(ctx, root.at("weights"), "weights");
      o.array("weights", [&](const json& v, const std::string& p) {
        cfg.weights.weights.push_back(parse_weight(ctx, v, p));
      });
      cfg.weights.p = o.numbers("p", cfg.weights.p);
      cfg.weights.q = o.numbers("q", cfg.weights.q);
      cfg.weights.duality_p = o.number("duality_p", cfg.weights.duality_p);
      cfg.weights.alphas = o.numbers("alphas", cfg.weights.alphas);
    }
    if (root.has("t1")) {
      Obj o(ctx, root.at("t1"), "t1");
      parse_t1(o, cfg.t1);
    }
    if (root.has("sweep")) {
      Obj o(ctx, root.at("sweep"), "sweep");
      cfg.sweep.suite = o.string("suite", cfg.sweep.suite);
      if (!suite_names().count(cfg.sweep.suite)) ctx.fail("sweep.suite", "unknown suite");
      o.array("levels", [&](const json& v, const std::string& p) {
        if (!v.is_number_unsigned() || v.get<std::size_t>() < 2) ctx.fail(p, "expected an integer >= 2");
        cfg.sweep.levels.push_back(v.get<std::size_t>());
      });
      cfg.sweep.max_drift = o.number("max_drift", cfg.sweep.max_drift);
    }
  }
  cfg.echo = std::move(doc);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

ExperimentConfig at_level(const ExperimentConfig& config, std::size_t level) {
  if (level < 2) throw ConfigError("refinement level must be >= 2");
  ExperimentConfig out = config;
  if (out.space.family == "grid2d") {
    out.space.nx = out.space.ny = level;
  } else if (out.space.family == "path" || out.space.family == "cycle") {
    out.space.n = level;
  } else {
    throw ConfigError("space family '" + out.space.family + "' has no refinement levels");
  }
  return out;
}

void set_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.echo["seed"] = seed;
}

}  // namespace sgcalc
