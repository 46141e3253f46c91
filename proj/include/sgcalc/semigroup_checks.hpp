#pragma once

#include "sgcalc/calculus.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sgcalc {

/// Operator families whose off-diagonal decay is measured.
struct OperatorFamily {
  enum class Kind { Heat, HeatDerivative, GradientHeat } kind = Kind::Heat;
  int k = 0;

  static OperatorFamily heat() { return {Kind::Heat, 0}; }
  static OperatorFamily derivative(int k) { return {Kind::HeatDerivative, k}; }
  static OperatorFamily gradient(int k) { return {Kind::GradientHeat, k}; }
  std::string label() const;
};

struct BallPair {
  Ball q1;
  Ball q2;
};

using BlockOperator = std::function<Block(const Block&)>;

struct TransferOptions {
  std::size_t exact_limit = 64;  ///< full orthonormal basis of L2(Q1) up to this size
  std::size_t probes = 64;       ///< random unit vectors above it
  std::uint64_t seed = 0;
};

/// Columns spanning the test inputs on Q1: the orthonormal basis of L2(Q1)
/// (|Q1| <= exact_limit) or seeded unit random vectors supported on Q1.
Block transfer_inputs(std::span<const Vertex> q1, const Field& mu, const TransferOptions& options = {});

/// The transfer norm given image = Op(transfer_inputs(q1)).
double transfer_norm_from_image(const Block& image, std::size_t q1_size, std::span<const Vertex> q2, const Field& mu,
                                const SparseMatrix* grad_rows = nullptr, const TransferOptions& options = {});

/// sup over f in L2(Q1), ||f|| = 1, of ||Op f||_{L2(Q2)}. With `grad_rows`
/// (a gradient_operator restricted to Q2) the target norm is that of |grad Op f|.
double transfer_norm(const BlockOperator& op, std::span<const Vertex> q1, std::span<const Vertex> q2,
                     const Field& mu, const SparseMatrix* grad_rows = nullptr, const TransferOptions& options = {});

/// Least-squares slope gamma in log(ratio) ~ -gamma log(1 + x), over entries
/// with x > 0 and ratio > 0. NaN with fewer than two such entries.
double fit_decay_exponent(std::span<const double> x, std::span<const double> ratio);

struct DecayRow {
  double s = 0.0;
  double r = 0.0;
  Vertex center1 = 0;
  Vertex center2 = 0;
  double distance = 0.0;
  double ratio = 0.0;
};

struct DecayTable {
  std::string family;
  std::vector<DecayRow> rows;
  double fitted_exponent = 0.0;
  /// Exponents fitted on the near and far halves of the separations.
  double near_exponent = 0.0;
  double far_exponent = 0.0;
};

/// Off-diagonal profile of the family at scale s over the given ball pairs.
/// Throws EmptyBall when a pair contains an empty ball.
DecayTable off_diagonal_profile(const Calculus& calc, const OperatorFamily& family, double s,
                                const std::vector<BallPair>& pairs, const TransferOptions& options = {});

struct SobolevResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// lhs = ||f||_{L^inf(Q)}, rhs = inf_Q M_2[(1 + tL)^M f].
SobolevResult resolvent_sobolev_check(const Calculus& calc, double t, int M_pow, const Ball& ball, const Field& f);

struct SobolevSweep {
  double max_ratio = 0.0;
  Vertex witness_center = 0;
  double radius = 0.0;
};

/// The same check over every ball of radius t^(1/m).
SobolevSweep resolvent_sobolev_sweep(const Calculus& calc, double t, int M_pow, const Field& f);

struct LimitsReport {
  std::vector<double> t;
  std::vector<double> heat_defect;        ///< ||e^-tL f - f||_2
  std::vector<double> derivative_norm;    ///< ||(tL)^k e^-tL f||_2
  std::vector<double> centered_derivative;///< ||(tL)^k e^-tL (f - P0 f)||_2
  int k = 1;
  bool small_t_heat = false;
  bool small_t_derivative = false;
  bool large_t_centered = false;
  bool monotone_tail = false;  ///< centered derivative nonincreasing for t >= k / lambda_2
  bool ok() const { return small_t_heat && small_t_derivative && large_t_centered && monotone_tail; }
};

/// Limits at both ends of the scale grid; the large-t limit is taken on the
/// part of f orthogonal to constants.
LimitsReport limits_check(const Calculus& calc, const Field& f, const ScaleGrid& grid, int k = 1,
                          double tolerance = 1e-3);

}  // namespace sgcalc
