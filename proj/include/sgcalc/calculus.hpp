#pragma once

#include "sgcalc/generator.hpp"
#include "sgcalc/geometry.hpp"
#include "sgcalc/scale_grid.hpp"
#include "sgcalc/spectral_function.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace sgcalc {

enum class ActionPath { Auto, Dense, Chebyshev };

struct CalculusOptions {
  double chebyshev_tol = 1e-12;        ///< uniform error of the polynomial, relative to max |g|
  std::size_t chebyshev_max_degree = 1 << 18;
  /// Relative cost of one sparse Clenshaw step versus one dense multiply-add,
  /// used by the automatic path choice.
  double sparse_penalty = 8.0;
};

/// Input prepared for repeated application of functions of L: the constant
/// part, the centered remainder and, optionally, its full modal coefficients.
struct PreparedInput {
  Eigen::RowVectorXd mean;  ///< P0 of each column
  Block centered;           ///< F - P0 F
  std::optional<Block> modal;
};

/// Functions of tL acting on fields. Two independent paths:
///  - dense: g(0) P0 F + sum over nonzero modes of g(t lambda_i) <F, v_i> v_i,
///  - matrix-free: g(0) P0 F + p(L)(F - P0 F) with p the Chebyshev
///    interpolant of u -> g(tu) on [0, Gershgorin bound].
/// The kernel of L is handled exactly by both.
class Calculus {
 public:
  explicit Calculus(GeneratorPtr gen, CalculusOptions options = {});

  const Generator& generator() const { return *gen_; }
  const GeneratorPtr& generator_ptr() const { return gen_; }
  const Space& space() const { return gen_->space(); }
  const Field& measure() const { return gen_->space().measure(); }
  const CalculusOptions& options() const { return options_; }

  PreparedInput prepare(const Block& F, bool with_modal = false) const;

  Block apply(const SpectralFunction& g, double t, const Block& F, ActionPath path = ActionPath::Auto) const;
  Field apply(const SpectralFunction& g, double t, const Field& f, ActionPath path = ActionPath::Auto) const;
  Block apply(const SpectralFunction& g, double t, const PreparedInput& in,
              ActionPath path = ActionPath::Auto) const;

  /// Path the automatic choice would take for this function, scale and width.
  ActionPath choose_path(const SpectralFunction& g, double t, Eigen::Index cols, bool modal_ready) const;

  /// Chebyshev coefficients of u -> g(t u) on [0, b], b the Gershgorin bound (cached).
  /// Returns nullopt when the adaptive degree would exceed `degree_cap`.
  std::optional<std::vector<double>> chebyshev_coefficients(const SpectralFunction& g, double t,
                                                            std::size_t degree_cap) const;

  /// Range [first, last] of nonzero modes with |g(t lambda)| above 1e-17 max|g|.
  std::pair<Eigen::Index, Eigen::Index> active_modes(const SpectralFunction& g, double t) const;

 private:
  Block apply_dense(const SpectralFunction& g, double t, const PreparedInput& in) const;
  Block apply_chebyshev(const std::vector<double>& coeffs, const Block& centered) const;
  void check_finite(const SpectralFunction& g, double t) const;

  GeneratorPtr gen_;
  CalculusOptions options_;
};

Field apply_function(const Calculus& calc, const SpectralFunction& g, double t, const Field& f,
                     ActionPath path = ActionPath::Auto);
/// e^-tL f
Field semigroup(const Calculus& calc, double t, const Field& f, ActionPath path = ActionPath::Auto);
/// (tL)^k e^-tL f
Field semigroup_derivative(const Calculus& calc, int k, double t, const Field& f,
                           ActionPath path = ActionPath::Auto);

/// |grad f|(x) = (sum_{y~x} A_xy (f(y)-f(x))^2 / len^2 / sum_{y~x} A_xy)^(1/2).
Field gradient(const Generator& gen, const Field& f);
/// Column-wise gradient magnitudes.
Block gradient(const Generator& gen, const Block& F);
/// Gradient restricted to the subgraph induced by `members`; output follows `members`.
Field ball_gradient(const Generator& gen, const Field& f, std::span<const Vertex> members);
BallGradient ball_gradient_fn(const GeneratorPtr& gen);

/// Linear map D with |D u|^2 restricted to `region` equal to sum over x in
/// region of mu(x) |grad u|(x)^2. Rows are (vertex, incident edge) pairs.
SparseMatrix gradient_operator(const Generator& gen, std::span<const Vertex> region);

/// Runs `visit(j, G_j)` for every scale of the grid with G_j = g(t_j L) F,
/// reusing modal coefficients of F when the dense path is taken.
void for_each_scale(const Calculus& calc, const SpectralFunction& g, const ScaleGrid& grid, const Block& F,
                    const std::function<void(std::size_t, const Block&)>& visit);

struct SquareFunctionVariant {
  enum class Kind { Holomorphic, Gradient } kind = Kind::Holomorphic;
  SpectralFunction g;  ///< holomorphic variant
  int k = 0;           ///< gradient variant: t^(1/m) grad (tL)^k e^-tL
  static SquareFunctionVariant holomorphic(SpectralFunction g) { return {Kind::Holomorphic, std::move(g), 0}; }
  static SquareFunctionVariant gradient(int k) { return {Kind::Gradient, fn::exp_neg(), k}; }
};

struct SquareFunctionResult {
  Field pointwise;
  double l2_norm = 0.0;        ///< L2 norm of the square function of f
  double operator_norm = 0.0;  ///< L2 -> L2 norm of f -> S f (exact spectral sup for the holomorphic variant)
};

SquareFunctionResult square_function(const Calculus& calc, const Field& f, const SquareFunctionVariant& variant,
                                     const ScaleGrid& grid);

}  // namespace sgcalc
