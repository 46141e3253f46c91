#include "sgcalc/space.hpp"

#include "sgcalc/error.hpp"
#include "sgcalc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace sgcalc {

SpacePtr Space::build(std::size_t n_vertices, std::vector<Edge> edges, Field measure,
                      std::vector<Point2> coordinates) {
  if (n_vertices == 0) throw InvalidArgument("space needs at least one vertex");
  if (static_cast<std::size_t>(measure.size()) != n_vertices)
    throw InvalidArgument("measure has " + std::to_string(measure.size()) + " entries, expected " +
                          std::to_string(n_vertices));
  for (Eigen::Index i = 0; i < measure.size(); ++i)
    if (!(measure[i] > 0.0) || !std::isfinite(measure[i]))
      throw NonPositiveWeight("measure of vertex " + std::to_string(i) + " is not positive");
  if (!coordinates.empty() && coordinates.size() != n_vertices)
    throw InvalidArgument("coordinate count does not match vertex count");

  std::shared_ptr<Space> s(new Space());
  s->n_ = n_vertices;
  s->adjacency_.resize(n_vertices);
  s->min_edge_length_ = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& ed = edges[e];
    if (ed.u < 0 || ed.v < 0 || static_cast<std::size_t>(ed.u) >= n_vertices ||
        static_cast<std::size_t>(ed.v) >= n_vertices)
      throw InvalidArgument("edge " + std::to_string(e) + " references a missing vertex");
    if (!(ed.length > 0.0) || !std::isfinite(ed.length))
      throw NonPositiveWeight("edge " + std::to_string(ed.u) + "-" + std::to_string(ed.v) +
                              " has non-positive length");
    if (ed.u == ed.v) throw InvalidArgument("self-loop at vertex " + std::to_string(ed.u));
    s->adjacency_[ed.u].push_back({ed.v, ed.length, e});
    s->adjacency_[ed.v].push_back({ed.u, ed.length, e});
    s->min_edge_length_ = std::min(s->min_edge_length_, ed.length);
  }
  if (edges.empty()) s->min_edge_length_ = 0.0;
  s->edges_ = std::move(edges);
  s->measure_ = std::move(measure);
  s->total_mass_ = s->measure_.sum();
  s->coordinates_ = std::move(coordinates);
  s->compute_metric();
  s->compute_orders();
  return s;
}

void Space::compute_metric() {
  const double inf = std::numeric_limits<double>::infinity();
  metric_.assign(n_ * n_, inf);
  bool disconnected = false;
#pragma omp parallel for schedule(dynamic, 16) reduction(|| : disconnected)
  for (std::size_t src = 0; src < n_; ++src) {
    double* dist = metric_.data() + src * n_;
    using Item = std::pair<double, Vertex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[src] = 0.0;
    heap.push({0.0, static_cast<Vertex>(src)});
    while (!heap.empty()) {
      auto [d, x] = heap.top();
      heap.pop();
      if (d > dist[x]) continue;
      for (const Neighbor& nb : adjacency_[x]) {
        double nd = d + nb.length;
        if (nd < dist[nb.vertex]) {
          dist[nb.vertex] = nd;
          heap.push({nd, nb.vertex});
        }
      }
    }
    for (std::size_t y = 0; y < n_; ++y)
      if (!std::isfinite(dist[y])) disconnected = true;
  }
  if (disconnected) throw DisconnectedGraph("graph with " + std::to_string(n_) + " vertices is not connected");
  // Dijkstra from both endpoints can differ in the last bit; symmetrize.
  for (std::size_t x = 0; x < n_; ++x)
    for (std::size_t y = x + 1; y < n_; ++y) {
      double d = std::min(metric_[x * n_ + y], metric_[y * n_ + x]);
      metric_[x * n_ + y] = metric_[y * n_ + x] = d;
    }
  diameter_ = *std::max_element(metric_.begin(), metric_.end());
}

void Space::compute_orders() {
  order_.resize(n_ * n_);
  prefix_mass_.resize(n_ * n_);
#pragma omp parallel for schedule(static)
  for (std::size_t x = 0; x < n_; ++x) {
    Vertex* ord = order_.data() + x * n_;
    const double* dist = metric_.data() + x * n_;
    std::iota(ord, ord + n_, 0);
    std::stable_sort(ord, ord + n_, [dist](Vertex a, Vertex b) { return dist[a] < dist[b]; });
    double acc = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      acc += measure_[ord[k]];
      prefix_mass_[x * n_ + k] = acc;
    }
  }

  std::vector<double> all(metric_);
  std::sort(all.begin(), all.end());
  radii_.clear();
  for (double d : all) {
    if (radii_.empty() || d > radius_with_slack(radii_.back())) radii_.push_back(d);
  }
}

std::size_t Space::ball_size(Vertex x, double r) const {
  if (r < 0.0) return 1;
  const Vertex* ord = order_.data() + index(x, 0);
  const double* dist = metric_.data() + index(x, 0);
  const double limit = radius_with_slack(r);
  // First position whose distance exceeds the limit.
  std::size_t lo = 1, hi = n_;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (dist[ord[mid]] <= limit)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

SpacePtr Space::with_family(std::string family) const {
  auto copy = std::shared_ptr<Space>(new Space(*this));
  copy->family_ = std::move(family);
  return copy;
}

SpacePtr Space::scaled_measure(double factor) const {
  if (!(factor > 0.0)) throw NonPositiveWeight("measure scale factor must be positive");
  auto copy = std::shared_ptr<Space>(new Space(*this));
  copy->measure_ *= factor;
  copy->total_mass_ *= factor;
  for (double& m : copy->prefix_mass_) m *= factor;
  return copy;
}

// ---- construction helpers ------------------------------------------------

SpacePtr build_space(const std::vector<Edge>& edges, const Field& vertex_measures) {
  return Space::build(static_cast<std::size_t>(vertex_measures.size()), edges, vertex_measures);
}

SpacePtr path_graph(std::size_t n, double edge_length, double vertex_measure) {
  if (n < 1) throw InvalidArgument("path needs n >= 1");
  std::vector<Edge> edges;
  std::vector<Point2> coords(n);
  for (std::size_t i = 0; i < n; ++i) coords[i] = {static_cast<double>(i) * edge_length, 0.0};
  for (std::size_t i = 0; i + 1 < n; ++i)
    edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>(i + 1), edge_length});
  return Space::build(n, std::move(edges), Field::Constant(static_cast<Eigen::Index>(n), vertex_measure),
                      std::move(coords))
      ->with_family("path");
}

SpacePtr cycle_graph(std::size_t n, double edge_length, double vertex_measure) {
  if (n < 3) throw InvalidArgument("cycle needs n >= 3");
  std::vector<Edge> edges;
  std::vector<Point2> coords(n);
  const double radius = static_cast<double>(n) * edge_length / (2.0 * M_PI);
  for (std::size_t i = 0; i < n; ++i) {
    double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
    coords[i] = {radius * std::cos(a), radius * std::sin(a)};
    edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>((i + 1) % n), edge_length});
  }
  return Space::build(n, std::move(edges), Field::Constant(static_cast<Eigen::Index>(n), vertex_measure),
                      std::move(coords))
      ->with_family("cycle");
}

SpacePtr grid2d(std::size_t nx, std::size_t ny, double edge_length, double vertex_measure) {
  if (nx < 1 || ny < 1) throw InvalidArgument("grid2d needs nx, ny >= 1");
  const std::size_t n = nx * ny;
  std::vector<Edge> edges;
  std::vector<Point2> coords(n);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      auto v = static_cast<Vertex>(j * nx + i);
      coords[v] = {static_cast<double>(i) * edge_length, static_cast<double>(j) * edge_length};
      if (i + 1 < nx) edges.push_back({v, v + 1, edge_length});
      if (j + 1 < ny) edges.push_back({v, static_cast<Vertex>(v + nx), edge_length});
    }
  return Space::build(n, std::move(edges), Field::Constant(static_cast<Eigen::Index>(n), vertex_measure),
                      std::move(coords))
      ->with_family("grid2d");
}

SpacePtr parse_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::vector<std::pair<Vertex, double>> measures;
  Vertex max_vertex = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first[0] == '#') {
      std::string keyword;
      if (first == "#") {
        if (!(ls >> keyword)) continue;
      } else {
        keyword = first.substr(1);
      }
      if (keyword != "measure") continue;
      long long u;
      double m;
      if (!(ls >> u >> m) || u < 0)
        throw ParseError("line " + std::to_string(line_no) + ": expected '# measure <vertex> <mass>'");
      measures.emplace_back(static_cast<Vertex>(u), m);
      max_vertex = std::max(max_vertex, static_cast<Vertex>(u));
      continue;
    }
    long long u, v;
    double len;
    std::istringstream es(line);
    if (!(es >> u >> v >> len) || u < 0 || v < 0)
      throw ParseError("line " + std::to_string(line_no) + ": expected '<u> <v> <length>'");
    std::string trailing;
    if (es >> trailing && trailing[0] != '#')
      throw ParseError("line " + std::to_string(line_no) + ": unexpected trailing token '" + trailing + "'");
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v), len});
    max_vertex = std::max({max_vertex, static_cast<Vertex>(u), static_cast<Vertex>(v)});
  }
  if (max_vertex < 0) throw ParseError("edge list is empty");
  Field mu = Field::Ones(max_vertex + 1);
  for (auto [u, m] : measures) mu[u] = m;
  return Space::build(static_cast<std::size_t>(max_vertex) + 1, std::move(edges), std::move(mu))
      ->with_family("file");
}

SpacePtr read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list '" + path + "'");
  return parse_edge_list(in);
}

void write_edge_list(const Space& space, std::ostream& out) {
  out.precision(17);
  for (const Edge& e : space.edges()) out << e.u << ' ' << e.v << ' ' << e.length << '\n';
  for (std::size_t x = 0; x < space.size(); ++x)
    out << "# measure " << x << ' ' << space.measure()[static_cast<Eigen::Index>(x)] << '\n';
}

// ---- balls ------------------------------------------------------------------

Ball make_ball(const Space& space, Vertex center, double radius) {
  if (center < 0 || static_cast<std::size_t>(center) >= space.size())
    throw InvalidArgument("ball center " + std::to_string(center) + " out of range");
  if (radius < 0.0) throw InvalidArgument("ball radius must be >= 0");
  Ball b;
  b.center = center;
  b.radius = radius;
  auto members = space.ball_members(center, radius);
  b.members.assign(members.begin(), members.end());
  b.mass = space.ball_mass(center, radius);
  return b;
}

double set_distance(const Space& space, std::span<const Vertex> a, std::span<const Vertex> b) {
  double best = std::numeric_limits<double>::infinity();
  for (Vertex x : a)
    for (Vertex y : b) best = std::min(best, space.distance(x, y));
  return best;
}

MetricCheck check_metric(const Space& space, std::size_t exhaustive_limit, std::size_t samples,
                         std::uint64_t seed) {
  MetricCheck res;
  const auto n = static_cast<Vertex>(space.size());
  for (Vertex x = 0; x < n; ++x) {
    if (space.distance(x, x) != 0.0) res.zero_diagonal = false;
    for (Vertex y = 0; y < n; ++y)
      if (space.distance(x, y) != space.distance(y, x)) res.symmetric = false;
  }
  auto check = [&](Vertex x, Vertex y, Vertex z) {
    double lhs = space.distance(x, z);
    double rhs = space.distance(x, y) + space.distance(y, z);
    double excess = lhs - rhs;
    if (excess > 1e-12 * std::max(1.0, rhs)) {
      res.triangle = false;
      res.worst_violation = std::max(res.worst_violation, excess);
    }
    ++res.triples_checked;
  };
  if (space.size() <= exhaustive_limit) {
    for (Vertex x = 0; x < n; ++x)
      for (Vertex y = 0; y < n; ++y)
        for (Vertex z = 0; z < n; ++z) check(x, y, z);
  } else {
    auto gen = substream(seed, "check_metric");
    std::uniform_int_distribution<Vertex> pick(0, n - 1);
    for (std::size_t s = 0; s < samples; ++s) check(pick(gen), pick(gen), pick(gen));
  }
  return res;
}

std::vector<double> thin_radii(std::span<const double> radii, std::size_t max_count) {
  std::vector<double> out;
  if (max_count == 0 || radii.size() <= max_count) return {radii.begin(), radii.end()};
  const double lo = radii.front() > 0.0 ? radii.front() : (radii.size() > 1 ? radii[1] : 1.0);
  const double hi = radii.back();
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(max_count - 1));
  double target = lo;
  for (double r : radii) {
    if (r <= 0.0 && radii.front() <= 0.0) {
      out.push_back(r);
      continue;
    }
    if (r >= target * (1.0 - 1e-12) || r == hi) {
      out.push_back(r);
      while (target <= r) target *= ratio;
    }
  }
  return out;
}

std::vector<double> positive_radii(const Space& space) {
  std::vector<double> out;
  for (double r : space.canonical_radii())
    if (r > 0.0) out.push_back(r);
  return out;
}

}  // namespace sgcalc
