#pragma once

#include "sgcalc/types.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace sgcalc {

/// A linear map on fields together with its adjoint for the mu-weighted
/// pairing <f, g> = sum f g mu. Both act column-wise on blocks.
struct LinearAction {
  std::function<Block(const Block&)> forward;
  std::function<Block(const Block&)> adjoint;
};

/// A bilinear map B(h, f) with its partial adjoints for the mu-weighted
/// pairing: <B(h, f), g> = <f, adjoint_f(h, g)> = <h, adjoint_h(f, g)>.
/// All act column-wise (column c of the result uses column c of each input).
struct BilinearAction {
  std::function<Block(const Block& H, const Block& F)> forward;
  std::function<Block(const Block& H, const Block& G)> adjoint_f;
  std::function<Block(const Block& F, const Block& G)> adjoint_h;
};

struct MixedNormOptions {
  std::size_t restarts = 16;
  std::size_t max_iterations = 60;
  double tolerance = 1e-6;  ///< relative change of every restart's estimate
  std::uint64_t seed = 0;
  /// Weight omega; norms are taken in L^p(omega mu) and adjoints transformed
  /// accordingly. Empty means omega = 1.
  Field weight;
};

struct MixedNormResult {
  double estimate = 0.0;  ///< best ratio found: a lower bound on the operator norm
  Field arg_h;            ///< maximizing first input (bilinear) or input (linear)
  Field arg_f;            ///< maximizing second input (bilinear only)
  std::size_t best_restart = 0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> per_restart;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Lower bound on sup ||A f||_{r} / ||f||_{p} by nonlinear power iteration.
MixedNormResult mixed_norm_estimate(const LinearAction& A, const Field& mu, double p, double r,
                                    const MixedNormOptions& options = {});

/// Lower bound on sup ||B(h, f)||_{r} / (||h||_p ||f||_q) by alternating
/// nonlinear power iteration. p, q in (1, inf], r in (1/2, inf).
MixedNormResult mixed_norm_estimate(const BilinearAction& B, const Field& mu, double p, double q, double r,
                                    const MixedNormOptions& options = {});

/// Column-wise L^p(mu) norms, p in (0, inf].
Eigen::RowVectorXd column_norms(const Block& X, const Field& mu, double p);

}  // namespace sgcalc
