#pragma once

#include "sgcalc/types.hpp"

#include <array>
#include <cstddef>
#include <istream>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sgcalc {

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  double length = 1.0;
};

struct Neighbor {
  Vertex vertex;
  double length;
  std::size_t edge;  // index into Space::edges()
};

using Point2 = std::array<double, 2>;

/// A finite connected weighted graph with its shortest-path metric and a
/// vertex measure. Immutable after construction; share it through
/// std::shared_ptr<const Space>.
///
/// Besides the metric, every vertex keeps the list of all vertices sorted by
/// distance from it (ties broken by index) together with prefix sums of the
/// measure along that list. A closed ball B(x, r) is therefore a prefix of
/// `by_distance(x)` and its mass is a single lookup.
class Space {
 public:
  /// Builds the space and computes all-pairs shortest paths.
  /// Throws NonPositiveWeight or DisconnectedGraph.
  static std::shared_ptr<const Space> build(std::size_t n_vertices, std::vector<Edge> edges,
                                            Field measure, std::vector<Point2> coordinates = {});

  std::size_t size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::vector<Neighbor>>& adjacency() const { return adjacency_; }
  const Field& measure() const { return measure_; }
  double total_mass() const { return total_mass_; }
  double diameter() const { return diameter_; }
  double min_edge_length() const { return min_edge_length_; }

  double distance(Vertex x, Vertex y) const { return metric_[index(x, y)]; }
  std::span<const double> distances_from(Vertex x) const {
    return {metric_.data() + index(x, 0), n_};
  }

  /// All vertices ordered by distance from x; by_distance(x)[0] == x.
  std::span<const Vertex> by_distance(Vertex x) const { return {order_.data() + index(x, 0), n_}; }

  /// Number of vertices y with d(x, y) <= r.
  std::size_t ball_size(Vertex x, double r) const;
  std::span<const Vertex> ball_members(Vertex x, double r) const {
    return by_distance(x).first(ball_size(x, r));
  }
  double ball_mass(Vertex x, double r) const { return prefix_mass_[index(x, 0) + ball_size(x, r) - 1]; }
  /// Mass of the first k vertices of by_distance(x), k >= 1.
  double prefix_mass(Vertex x, std::size_t k) const { return prefix_mass_[index(x, 0) + k - 1]; }

  /// Sorted distinct inter-vertex distances, starting with 0.
  std::span<const double> canonical_radii() const { return radii_; }

  bool has_coordinates() const { return !coordinates_.empty(); }
  const std::vector<Point2>& coordinates() const { return coordinates_; }

  /// Label of the family the space was generated from ("path", "grid2d", ...).
  const std::string& family() const { return family_; }
  std::shared_ptr<const Space> with_family(std::string family) const;

  /// Same graph with the measure multiplied by `factor`.
  std::shared_ptr<const Space> scaled_measure(double factor) const;

 private:
  Space() = default;
  std::size_t index(Vertex x, Vertex y) const {
    return static_cast<std::size_t>(x) * n_ + static_cast<std::size_t>(y);
  }
  void compute_metric();
  void compute_orders();

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
  Field measure_;
  double total_mass_ = 0.0;
  double diameter_ = 0.0;
  double min_edge_length_ = 0.0;
  std::vector<double> metric_;
  std::vector<Vertex> order_;
  std::vector<double> prefix_mass_;
  std::vector<double> radii_;
  std::vector<Point2> coordinates_;
  std::string family_ = "custom";
};

using SpacePtr = std::shared_ptr<const Space>;

/// Tolerance used when deciding d(x, y) <= r.
inline double radius_with_slack(double r) { return r * (1.0 + 1e-12) + 1e-14; }

// ---- construction -------------------------------------------------------

SpacePtr build_space(const std::vector<Edge>& edges, const Field& vertex_measures);

/// Path 0-1-...-(n-1); vertex i sits at coordinate i * edge_length.
SpacePtr path_graph(std::size_t n, double edge_length = 1.0, double vertex_measure = 1.0);
SpacePtr cycle_graph(std::size_t n, double edge_length = 1.0, double vertex_measure = 1.0);
/// nx-by-ny lattice, vertex (i, j) has index j * nx + i and coordinates (i, j) * edge_length.
SpacePtr grid2d(std::size_t nx, std::size_t ny, double edge_length = 1.0, double vertex_measure = 1.0);

/// Parses "u v length" lines with optional "# measure u m" lines. Other lines
/// starting with '#' and blank lines are ignored. Missing measures default to 1.
SpacePtr parse_edge_list(std::istream& in);
SpacePtr read_edge_list(const std::string& path);
void write_edge_list(const Space& space, std::ostream& out);

// ---- balls ----------------------------------------------------------------

struct Ball {
  Vertex center = 0;
  double radius = 0.0;
  std::vector<Vertex> members;
  double mass = 0.0;
};

Ball make_ball(const Space& space, Vertex center, double radius);

/// Distance between two vertex sets.
double set_distance(const Space& space, std::span<const Vertex> a, std::span<const Vertex> b);

/// Checks symmetry, zero diagonal and the triangle inequality. Exhaustive up to
/// `exhaustive_limit` vertices, otherwise on `samples` random triples.
struct MetricCheck {
  bool symmetric = true;
  bool zero_diagonal = true;
  bool triangle = true;
  std::size_t triples_checked = 0;
  double worst_violation = 0.0;
  bool ok() const { return symmetric && zero_diagonal && triangle; }
};
MetricCheck check_metric(const Space& space, std::size_t exhaustive_limit = 500,
                         std::size_t samples = 200000, std::uint64_t seed = 0);

/// Keeps at most `max_count` radii from `radii`, roughly geometrically spaced.
std::vector<double> thin_radii(std::span<const double> radii, std::size_t max_count);

/// Canonical radii without the zero radius.
std::vector<double> positive_radii(const Space& space);

}  // namespace sgcalc
