#pragma once

#include "sgcalc/bmo.hpp"
#include "sgcalc/paraproduct.hpp"
#include "sgcalc/semigroup_checks.hpp"

#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sgcalc {

/// A candidate operator T with its adjoint for the mu-weighted pairing.
struct OperatorUnderTest {
  std::string label;
  int kappa = 1;
  std::optional<Eigen::MatrixXd> matrix;  ///< (Tf)(x) = sum_y matrix(x, y) f(y), when available
  std::function<Block(const Block&)> forward;
  std::function<Block(const Block&)> adjoint;

  Field apply(const Field& f) const { return forward(Block(f)).col(0); }
  Field apply_adjoint(const Field& f) const { return adjoint(Block(f)).col(0); }

  /// Adjoint M^-1 T^T M.
  static OperatorUnderTest from_matrix(Eigen::MatrixXd T, const Field& mu, std::string label);
  static OperatorUnderTest zero(std::size_t n);
  static OperatorUnderTest identity(std::size_t n);
  static OperatorUnderTest multiplication(const Field& b);
  static OperatorUnderTest semigroup(const Calculus& calc, double s0);
  /// f -> Pi_1(h, f); the adjoint is the f-slot adjoint of Pi_1.
  static OperatorUnderTest paraproduct(const Calculus& calc, const CalculusPair& cp, const Field& h,
                                       const ScaleGrid& grid);
  OperatorUnderTest scaled(double c) const;
};

/// max relative defect |<Tf, g> - <f, T*g>| / (||Tf|| ||g||) over random pairs.
double adjoint_defect(const OperatorUnderTest& T, const Field& mu, std::uint64_t seed, int trials = 8);

struct HarnessOptions {
  std::size_t scale_stride = 4;     ///< use every k-th grid scale inside the admissible range
  std::size_t q1_random = 2;        ///< random Q1 centers besides the central vertex
  std::size_t q2_cap = 12;          ///< Q2 centers per Q1
  /// Largest off-diagonal ball radius as a fraction of the diameter. Separations
  /// then span at least [2r, 8r], enough range for a power fit.
  double max_radius_fraction = 1.0 / 16.0;
  TransferOptions transfer;         ///< basis / probing rule for the ratio maximization
  std::uint64_t seed = 0;
};

struct Thresholds {
  double exponent_margin = 1.0;     ///< fitted exponent must reach d_hom + margin
  double near_ratio_factor = 10.0;  ///< at each scale, near-pair ratios must stay within this multiple of their median
  double smoothness_exponent = 0.0; ///< kernel smoothness fit target; 0 means d_hom + 3N + 1
};

struct PairRatio {
  double s = 0.0;
  double r = 0.0;
  Vertex center1 = 0;
  Vertex center2 = 0;
  double distance = 0.0;
  double ratio = 0.0;          ///< T route
  double adjoint_ratio = 0.0;  ///< T* route
};

struct ScaleFit {
  double s = 0.0;
  double r = 0.0;
  std::size_t pairs = 0;
  double exponent = 0.0;
  double adjoint_exponent = 0.0;
  bool skipped = false;  ///< no separated pairs at this scale
};

struct OffDiagonalTable {
  std::vector<PairRatio> rows;
  std::vector<ScaleFit> fits;
  double min_exponent = 0.0;  ///< over fitted scales and both routes
  double median_exponent = 0.0;
};

/// Ratios ||(sL)^kappa e^-sL T f||_{L2(Q2)} / ||f||_{L2(Q1)} (and with T*) for
/// d(Q1, Q2) >= 2 s^(1/m), maximized over L2(Q1), with per-scale decay fits.
OffDiagonalTable check_off_diagonal(const OperatorUnderTest& T, const Calculus& calc, const ScaleGrid& grid,
                                    int kappa, const HarnessOptions& options = {});

struct WeakBoundRow {
  double s = 0.0;
  Vertex center1 = 0;
  Vertex center2 = 0;
  double distance = 0.0;
  double ratio = 0.0;
  double adjoint_ratio = 0.0;
  double inner_k1 = 0.0;  ///< inner factor (sL) e^-sL
  double inner_k2 = 0.0;  ///< inner factor (sL)^2 e^-sL
};

struct WeakBoundTable {
  std::vector<WeakBoundRow> rows;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  double worst_spread = 0.0;  ///< max over scales of (largest ratio / median ratio) at that scale
};

/// Near pairs (d(Q1, Q2) <= 2 s^(1/m)) of ||(sL)^kappa e^-sL T (sL)^k e^-sL f||_{L2(Q2)} / ||f||_{L2(Q1)}.
WeakBoundTable check_weak_boundedness(const OperatorUnderTest& T, const Calculus& calc, const ScaleGrid& grid,
                                      int kappa, const HarnessOptions& options = {});

struct T1Result {
  Field t1;
  Field t1_star;
  BmoReport t1_bmo;
  BmoReport t1_star_bmo;
  BmoReport kappa_oscillation;  ///< sup of averages of |(1 - e^-tL)^kappa T(1)|
};

T1Result compute_t1(const OperatorUnderTest& T, const Calculus& calc, const ScaleGrid& grid, int kappa = 1);

struct L2Estimate {
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// sqrt of the top eigenvalue of T*T by block power iteration (one
/// deterministic start plus `random_starts` seeded ones).
L2Estimate estimate_l2_norm(const OperatorUnderTest& T, const Field& mu, std::uint64_t seed = 0, double tol = 1e-8,
                            std::size_t max_iterations = 1000, std::size_t random_starts = 4);

struct KernelSpec {
  enum class Profile { Zero, Riesz, Sign, Custom } profile = Profile::Riesz;
  enum class Diagonal { Zero, Cancel, Prescribed } diagonal = Diagonal::Cancel;
  double gamma = 2.0;  ///< decay order of the built-in profiles
  double truncation = std::numeric_limits<double>::infinity();  ///< K = 0 beyond this distance
  /// Width of a smooth cutoff chi(x) chi(y) toward the coordinate bounding box,
  /// as a fraction of its extent; 0 disables it.
  double taper = 0.0;
  Field prescribed;    ///< target T(1) for the Prescribed rule
  std::function<double(Vertex, Vertex)> custom;
};

/// T(x, y) = chi(x) K(x, y) chi(y) mu(y) for x != y with the chosen diagonal rule.
/// Riesz: (x_1 - y_1) / d(x, y)^(gamma + 1). Sign: sign(y_1 - x_1) / d(x, y)^gamma.
/// Throws SingularSpec on non-finite off-diagonal entries.
OperatorUnderTest make_cz_operator(const Space& space, const KernelSpec& spec);

/// Dense matrix from "row,col,value" lines (a non-numeric first line is a header).
Eigen::MatrixXd read_kernel_csv(std::istream& in, std::size_t n);

struct KernelSmoothness {
  double exponent = 0.0;  ///< fitted decay of |K(x, y) - K(x', y)| for neighbours x ~ x' against d(x, y)
  double target = 0.0;
  std::size_t samples = 0;
  bool pass = false;
};

/// Measures the smoothness decay of the kernel K(x, y) = T(x, y) / mu(y) on
/// seeded samples with d(x, y) >= 2 d(x, x'). Informational, not part of the verdict.
KernelSmoothness kernel_smoothness(const Space& space, const Eigen::MatrixXd& T, double target,
                                   std::uint64_t seed = 0, std::size_t samples = 64);

struct Verdict {
  bool off_diagonal_pass = false;
  bool weak_boundedness_pass = false;
  bool hypotheses_pass = false;
  bool l2_converged = false;
  bool adjoint_consistent = false;
  bool flagged = false;
  std::string summary;
};

struct HypothesisReport {
  std::string label;
  int kappa = 1;
  double d_hom = 0.0;
  double exponent_threshold = 0.0;
  OffDiagonalTable off_diagonal;
  WeakBoundTable weak_boundedness;
  T1Result t1;
  L2Estimate l2;
  double adjoint_defect = 0.0;
  std::optional<KernelSmoothness> smoothness;  ///< when T has a matrix
  std::size_t skipped_scales = 0;              ///< scales without separated pairs
  Verdict verdict;
};

HypothesisReport t1_report(const OperatorUnderTest& T, const Calculus& calc, const ScaleGrid& grid, double d_hom,
                           const Thresholds& thresholds = {}, const HarnessOptions& options = {});

}  // namespace sgcalc
