#pragma once

#include "sgcalc/calculus.hpp"

#include <vector>

namespace sgcalc {

/// The band-pass / low-pass pair of the paraproduct calculus.
struct CalculusPair {
  int N = 1;
  SpectralFunction psi;      ///< u^N e^-u (1 - e^-u)
  SpectralFunction phi;      ///< e^-u
  SpectralFunction alt_phi;  ///< -int_u^inf psi_1(y) dy / y with psi_1(y) = y e^-y (1 - e^-y)

  static CalculusPair with_order(int N);
  /// N = ceil(d_hom / m) + 1.
  static CalculusPair for_dimension(double d_hom, double m);
};

/// The reproducing constant c with f = c int psi_1(tL) f dt/t on the
/// complement of constants: 1 / int_0^inf e^-u (1 - e^-u) du = 2.
inline constexpr double kReproducingConstant = 2.0;

struct TrilinearResult {
  double value = 0.0;
  std::vector<double> per_scale;
  double quadrature_error_estimate = 0.0;  ///< |value - value on the rho^2 subgrid|
};

/// sum_j w_j outer(t_j L)[inner1(t_j L) A .* inner2(t_j L) B], column by column.
Block scale_sum(const Calculus& calc, const ScaleGrid& grid, const SpectralFunction& outer,
                const SpectralFunction& inner1, const Block& A, const SpectralFunction& inner2, const Block& B);

/// Lambda^1(b, f, g) = int <psi_t g, phi_t b * psi_t f> dt/t
TrilinearResult lambda1(const Calculus& calc, const CalculusPair& cp, const Field& b, const Field& f, const Field& g,
                        const ScaleGrid& grid);
/// Lambda^2(b, f, g) = int <psi_t g, phi_t f * psi_t b> dt/t
TrilinearResult lambda2(const Calculus& calc, const CalculusPair& cp, const Field& b, const Field& f, const Field& g,
                        const ScaleGrid& grid);
/// int <psi_t g * phi_t f * psi_t h, 1> dt/t
TrilinearResult lambda_sym(const Calculus& calc, const CalculusPair& cp, const Field& h, const Field& f,
                           const Field& g, const ScaleGrid& grid);
/// int <psi_t g, phi_t f * phi_t h> dt/t, the form dual to Pi_1.
TrilinearResult lambda_pi1(const Calculus& calc, const CalculusPair& cp, const Field& h, const Field& f,
                           const Field& g, const ScaleGrid& grid);
/// int <phi_t g, psi_t f * phi_t h> dt/t, the form dual to Pi_2.
TrilinearResult lambda_pi2(const Calculus& calc, const CalculusPair& cp, const Field& h, const Field& f,
                           const Field& g, const ScaleGrid& grid);

/// U_b(f) = int psi_t[phi_t b * psi_t f] dt/t, so that Lambda^1(b, f, g) = <U_b f, g>.
Field paraproduct_u(const Calculus& calc, const CalculusPair& cp, const Field& b, const Field& f, const ScaleGrid& grid);

/// Pi_1(h, f) = int psi_t[phi_t f * phi_t h] dt/t
Field paraproduct_pi1(const Calculus& calc, const CalculusPair& cp, const Field& h, const Field& f,
                      const ScaleGrid& grid);
Block paraproduct_pi1(const Calculus& calc, const CalculusPair& cp, const Block& H, const Block& F,
                      const ScaleGrid& grid);
/// Pi_2(h, f) = int phi_t[psi_t f * phi_t h] dt/t
Field paraproduct_pi2(const Calculus& calc, const CalculusPair& cp, const Field& h, const Field& f,
                      const ScaleGrid& grid);
Block paraproduct_pi2(const Calculus& calc, const CalculusPair& cp, const Block& H, const Block& F,
                      const ScaleGrid& grid);

/// Adjoints in the mu-weighted pairing: <Pi(h, f), g> = <f, adj_f(h, g)> = <h, adj_h(f, g)>.
Block pi1_adjoint_f(const Calculus& calc, const CalculusPair& cp, const Block& H, const Block& G, const ScaleGrid& grid);
Block pi1_adjoint_h(const Calculus& calc, const CalculusPair& cp, const Block& F, const Block& G, const ScaleGrid& grid);
Block pi2_adjoint_f(const Calculus& calc, const CalculusPair& cp, const Block& H, const Block& G, const ScaleGrid& grid);
Block pi2_adjoint_h(const Calculus& calc, const CalculusPair& cp, const Block& F, const Block& G, const ScaleGrid& grid);

/// ||2 sum_j w_j psi_1(t_j L) f - (f - P0 f)||_2 / ||f - P0 f||_2. Throws ZeroInput when f is constant.
double reproducing_residual(const Calculus& calc, const Field& f, const ScaleGrid& grid);

struct ProductDecomposition {
  Field part1;  ///< int psi_t[alt_phi_t f * alt_phi_t g] dt/t
  Field part2;  ///< int alt_phi_t[psi_t f * alt_phi_t g] dt/t
  Field part3;  ///< int alt_phi_t[alt_phi_t f * psi_t g] dt/t
  Field kernel_correction;  ///< R(f, g) = P0 f * P0 g
  double residual_norm = 0.0;  ///< ||c^3 (part1 + part2 + part3) - (f g - R)||_2 / ||f g||_2
};

ProductDecomposition product_decomposition(const Calculus& calc, const Field& f, const Field& g,
                                           const ScaleGrid& grid);

}  // namespace sgcalc
