#pragma once

#include "sgcalc/space.hpp"

#include <span>
#include <string>
#include <vector>

namespace sgcalc {

struct Weight {
  Field values;
  std::string name;
};

Weight constant_weight(const Space& space, double c = 1.0);
/// (1 + d(x0, x))^alpha
Weight power_weight(const Space& space, double alpha, Vertex x0);
/// a on one parity class of vertices, b on the other (parity of the graph
/// distance to vertex 0 in units of the shortest edge).
Weight checkerboard_weight(const Space& space, double a, double b);
/// Vertex nearest to the centroid of the coordinates (vertex 0 without coordinates).
Vertex central_vertex(const Space& space);

/// Throws NonPositiveWeight for non-positive or non-finite entries.
void validate_weight(const Space& space, const Weight& w);

/// max over balls of avg_Q(w) * avg_Q(w^(-1/(p-1)))^(p-1). Radii default to the canonical grid.
double ap_characteristic(const Space& space, const Weight& w, double p, std::span<const double> radius_grid = {});
/// max over balls of avg_Q(w^q)^(1/q) / avg_Q(w); exactly 1 for q = 1.
double rh_characteristic(const Space& space, const Weight& w, double q, std::span<const double> radius_grid = {});

/// w^(1 - p') with p' = p / (p - 1). Defined for every p > 1, so the map is
/// an involution when applied with p and then p'.
Weight duality_transform(const Weight& w, double p);

/// (sum |f|^p w mu)^(1/p), or max |f| for p = inf.
double weighted_norm(const Space& space, const Field& f, double p, const Weight& w);

struct DualityConsistency {
  double p = 0.0;
  std::vector<double> alphas;
  std::vector<double> ap_half;  ///< A_{p/2} characteristic of w
  std::vector<double> ap_dual;  ///< A_{p'} characteristic of the transform
  std::vector<double> rh_dual;  ///< RH_{(2/p')'} characteristic of the transform
  bool monotone = false;        ///< dual-side characteristics follow the ordering of ap_half
};

/// Compares orderings along the power-weight family (1 + d(x0, .))^alpha. Requires p > 2.
DualityConsistency duality_consistency(const Space& space, double p, std::span<const double> alphas, Vertex x0,
                                       std::span<const double> radius_grid = {});

}  // namespace sgcalc
