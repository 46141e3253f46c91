#pragma once

#include "sgcalc/space.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sgcalc {

struct BallPairWitness {
  Vertex x = 0;
  Vertex y = 0;
  double radius = 0.0;
  double ratio = 0.0;
};

/// Measured doubling parameters of a space over a radius grid.
struct GeometryReport {
  double C0 = 1.0;           ///< max mu(B(x,2r)) / mu(B(x,r))
  double d_hom = 0.0;        ///< log2(C0)
  double c_comp = 1.0;       ///< constant in mu(B(y,r)) <= c (1 + d(x,y)/r)^N mu(B(x,r))
  double N_comp = 0.0;       ///< exponent in the same bound
  double dilation_C = 1.0;      ///< smallest C with mu(B(x,tR)) <= C t^d_hom mu(B(x,R)), t in {2,4,8}
  BallPairWitness doubling_witness;
  BallPairWitness comparison_witness;
  std::vector<double> radii;
  std::vector<bool> saturated;  ///< radius >= diameter
  bool comparison_sampled = false;
};

/// Throws EmptyGrid when `radius_grid` is empty, InvalidArgument when it is
/// not positive and sorted.
GeometryReport measure_doubling(const Space& space, std::span<const double> radius_grid);

/// Uncentered maximal function M_s f(x) = sup over balls B containing x of
/// (mu(B)^-1 int_B |f|^s)^(1/s). Balls range over every center and every
/// radius of `radius_grid` (the canonical radii when empty).
Field maximal(const Space& space, const Field& f, double s, std::span<const double> radius_grid = {});

/// S(x, c) = sum over y in B(x, r) of values(y, c). Gathers along the
/// distance order for few columns or small balls, multiplies by the dense
/// ball-indicator matrix otherwise.
Block ball_sums(const Space& space, double r, const Block& values);

/// Ball sums divided by ball masses.
Block ball_averages(const Space& space, double r, const Block& weighted_values);

/// |grad f| on the members of a ball (same order as `members`), using only
/// edges with both endpoints in the ball.
using BallGradient = std::function<Field(const Field& f, std::span<const Vertex> members)>;

struct PoincareOptions {
  std::size_t random_probes = 8;
  std::size_t max_dense_ball = 1200;  ///< eigen-probes are skipped for larger balls
  std::uint64_t seed = 0;
  /// Per-edge coefficients of the gradient form used for eigen-probes (empty: all 1).
  std::vector<double> edge_weights;
};

/// Smallest C such that (avg_B |f - f_B|^q)^(1/q) <= C r (avg_B |grad f|^q)^(1/q)
/// holds for every probe f. Probes are the eigenvectors of the ball-restricted
/// gradient form (exact for q = 2) plus seeded random fields. A singleton ball returns 0.
double poincare_constant(const Space& space, double q, const Ball& ball, const BallGradient& gradient,
                         const PoincareOptions& options = {});

}  // namespace sgcalc
