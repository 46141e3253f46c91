#pragma once

#include "sgcalc/calculus.hpp"

#include <vector>

namespace sgcalc {

struct BmoWitness {
  Vertex center = 0;
  double radius = 0.0;
  double t = 0.0;
};

struct ScaleSup {
  double t = 0.0;
  double radius = 0.0;
  double sup = 0.0;
  Vertex center = 0;
  bool saturated = false;  ///< radius >= diameter: every ball is the whole space
};

struct BmoReport {
  double norm = 0.0;
  double norm_unsaturated = 0.0;  ///< sup restricted to radii below the diameter
  BmoWitness witness;
  std::vector<ScaleSup> per_scale;
};

struct BmoOptions {
  /// Use L2 ball averages (mu(Q)^-1 int_Q |.|^2)^(1/2) instead of L1.
  bool l2_average = false;
  /// Oscillation operator (1 - e^-tL)^kappa; kappa = 1 is f - e^-tL f.
  int kappa = 1;
};

/// sup over t_j and balls of radius t_j^(1/m) of the average of |(1 - e^-tL)^kappa f|.
BmoReport bmo_l_norm(const Calculus& calc, const Field& f, const ScaleGrid& grid, const BmoOptions& options = {});
/// One report per column of F.
std::vector<BmoReport> bmo_l_norms(const Calculus& calc, const Block& F, const ScaleGrid& grid,
                                   const BmoOptions& options = {});

struct ClassicalBmo {
  double norm = 0.0;
  Vertex center = 0;
  double radius = 0.0;
};

/// sup over balls of mu(Q)^-1 int_Q |f - f_Q|. Radii default to the canonical grid.
ClassicalBmo bmo_classical(const Space& space, const Field& f, std::span<const double> radius_grid = {});
inline double bmo_classical_norm(const Space& space, const Field& f, std::span<const double> radius_grid = {}) {
  return bmo_classical(space, f, radius_grid).norm;
}

struct CarlesonReport {
  int k = 1;
  double norm = 0.0;
  BmoWitness witness;
  std::vector<ScaleSup> per_scale;  ///< sup over balls of radius t_j^(1/m) of the box mass ratio
};

/// sup over balls Q of mu(Q)^-1 sum_{x in Q} sum_{t_j^(1/m) <= r_Q} |(t_j L)^k e^-t_j L (1 - e^-t_j L) f(x)|^2 mu(x) w_j,
/// with ball radii ranging over {t_j^(1/m)}. The scale on the box edge gets half weight.
CarlesonReport carleson_norm(const Calculus& calc, const Field& f, int k, const ScaleGrid& grid);
std::vector<CarlesonReport> carleson_norms(const Calculus& calc, const Block& F, int k, const ScaleGrid& grid);

/// sum_x |f(x)| mu(x) / ((1 + d(x0, x))^(2N + beta) mu(B(x0, 1 + d(x0, x)))).
double m_membership_norm(const Space& space, const Field& f, Vertex x0, double beta, double N);

/// M_s^# h(x) = sup_j (mu(B(x, t_j^(1/m)))^-1 int_B |psi(t_j L) h|^s)^(1/s).
Field sharp_maximal(const Calculus& calc, const Field& h, double s, const ScaleGrid& grid, const SpectralFunction& psi);
Block sharp_maximal(const Calculus& calc, const Block& H, double s, const ScaleGrid& grid, const SpectralFunction& psi);

}  // namespace sgcalc
