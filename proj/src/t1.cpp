#include "sgcalc/t1.hpp"

#include "sgcalc/error.hpp"
#include "sgcalc/rng.hpp"
#include "sgcalc/weights.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>

namespace sgcalc {
namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

// min over x in `members` of d(x, y), for every y.
std::vector<double> distance_to_set(const Space& space, std::span<const Vertex> members) {
  std::vector<double> out(space.size(), kInfinity);
  for (Vertex x : members) {
    auto row = space.distances_from(x);
    for (std::size_t y = 0; y < out.size(); ++y) out[y] = std::min(out[y], row[y]);
  }
  return out;
}

template <class T>
std::vector<T> spread_subsample(const std::vector<T>& items, std::size_t cap) {
  if (items.size() <= cap || cap == 0) return items;
  std::vector<T> out;
  if (cap == 1) return {items.front()};
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t k = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(items.size() - 1) / static_cast<double>(cap - 1)));
    if (out.empty() || !(out.back().center == items[k].center)) out.push_back(items[k]);
  }
  return out;
}

std::vector<Vertex> q1_centers(const Space& space, const HarnessOptions& options) {
  std::vector<Vertex> centers{central_vertex(space)};
  auto gen = substream(options.seed, "t1-centers");
  const std::size_t wanted = std::min(space.size(), options.q1_random + 1);
  std::size_t guard = 0;
  while (centers.size() < wanted && guard++ < 64 * wanted) {
    const auto v = static_cast<Vertex>(gen() % space.size());
    if (std::find(centers.begin(), centers.end(), v) == centers.end()) centers.push_back(v);
  }
  return centers;
}

// Candidate second balls: one center per distinct distance from c.
std::vector<Vertex> ring_representatives(const Space& space, Vertex c) {
  std::vector<Vertex> out;
  double last = -1.0;
  for (Vertex v : space.by_distance(c)) {
    const double d = space.distance(c, v);
    if (d > radius_with_slack(last)) {
      out.push_back(v);
      last = d;
    }
  }
  return out;
}

struct Cell {
  std::size_t scale = 0;
  double s = 0.0;
  double r = 0.0;
  Ball q1;
  std::vector<Ball> q2;
  std::vector<double> distance;
};

// Ball pairs at radius r around each Q1 center, separated (d >= 2r) or near (d <= 2r).
std::vector<Cell> build_cells(const Space& space, const std::vector<double>& scales, double m, bool separated,
                              const HarnessOptions& options) {
  const std::vector<Vertex> centers = q1_centers(space, options);
  std::vector<Cell> cells;
  for (std::size_t j = 0; j < scales.size(); ++j) {
    const double s = scales[j], r = std::pow(s, 1.0 / m);
    for (Vertex c : centers) {
      Cell cell;
      cell.scale = j;
      cell.s = s;
      cell.r = r;
      cell.q1 = make_ball(space, c, r);
      const std::vector<double> dist = distance_to_set(space, cell.q1.members);
      std::vector<Ball> cands;
      std::vector<double> cand_d;
      for (Vertex v : ring_representatives(space, c)) {
        Ball b = make_ball(space, v, r);
        double d = kInfinity;
        for (Vertex y : b.members) d = std::min(d, dist[y]);
        const bool ok = separated ? d >= 2.0 * r * (1.0 - 1e-12) : d <= radius_with_slack(2.0 * r);
        if (ok) {
          cands.push_back(std::move(b));
          cand_d.push_back(d);
        }
      }
      struct Tagged {
        Vertex center;
        std::size_t i;
      };
      std::vector<Tagged> tagged;
      for (std::size_t i = 0; i < cands.size(); ++i) tagged.push_back({cands[i].center, i});
      for (const Tagged& t : spread_subsample(tagged, options.q2_cap)) {
        cell.q2.push_back(cands[t.i]);
        cell.distance.push_back(cand_d[t.i]);
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<double> scales_in_radius_range(const ScaleGrid& grid, double m, double r_lo, double r_hi,
                                           std::size_t stride) {
  std::vector<double> in_range;
  for (double t : grid.t()) {
    const double r = std::pow(t, 1.0 / m);
    if (r >= r_lo * (1.0 - 1e-12) && r <= r_hi) in_range.push_back(t);
  }
  std::vector<double> out;
  for (std::size_t j = 0; j < in_range.size(); j += std::max<std::size_t>(1, stride)) out.push_back(in_range[j]);
  return out;
}

// Runs body(i) for i < count in parallel; the first exception is rethrown.
template <class Body>
void parallel_cells(std::size_t count, Body&& body) {
  std::exception_ptr error;
  std::mutex mu;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

// ---- operators ---------------------------------------------------------------

OperatorUnderTest OperatorUnderTest::from_matrix(Eigen::MatrixXd T, const Field& mu, std::string label) {
  if (T.rows() != T.cols() || T.rows() != mu.size()) throw InvalidArgument("from_matrix: shape mismatch");
  OperatorUnderTest op;
  op.label = std::move(label);
  op.matrix = std::move(T);
  auto M = std::make_shared<const Eigen::MatrixXd>(*op.matrix);
  auto w = std::make_shared<const Field>(mu);
  op.forward = [M](const Block& X) -> Block { return (*M) * X; };
  op.adjoint = [M, w](const Block& X) -> Block {
    return w->cwiseInverse().asDiagonal() * (M->transpose() * (w->asDiagonal() * X));
  };
  return op;
}

OperatorUnderTest OperatorUnderTest::zero(std::size_t n) {
  OperatorUnderTest op;
  op.label = "zero";
  op.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  op.forward = op.adjoint = [](const Block& X) -> Block { return Block::Zero(X.rows(), X.cols()); };
  return op;
}

OperatorUnderTest OperatorUnderTest::identity(std::size_t n) {
  OperatorUnderTest op;
  op.label = "identity";
  op.matrix = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  op.forward = op.adjoint = [](const Block& X) -> Block { return X; };
  return op;
}

OperatorUnderTest OperatorUnderTest::multiplication(const Field& b) {
  OperatorUnderTest op;
  op.label = "multiplication";
  op.matrix = Eigen::MatrixXd(b.asDiagonal());
  auto bp = std::make_shared<const Field>(b);
  op.forward = op.adjoint = [bp](const Block& X) -> Block { return bp->asDiagonal() * X; };
  return op;
}

OperatorUnderTest OperatorUnderTest::semigroup(const Calculus& calc, double s0) {
  if (!(s0 >= 0.0)) throw InvalidArgument("semigroup operator: s0 must be >= 0");
  OperatorUnderTest op;
  op.label = "semigroup";
  const SpectralFunction heat = fn::exp_neg();
  op.forward = op.adjoint = [calc, heat, s0](const Block& X) -> Block { return calc.apply(heat, s0, X); };
  return op;
}

OperatorUnderTest OperatorUnderTest::paraproduct(const Calculus& calc, const CalculusPair& cp, const Field& h,
                                                 const ScaleGrid& grid) {
  OperatorUnderTest op;
  op.label = "paraproduct-pi1";
  auto hp = std::make_shared<const Field>(h);
  op.forward = [calc, cp, hp, grid](const Block& X) -> Block {
    return paraproduct_pi1(calc, cp, Block(hp->replicate(1, X.cols())), X, grid);
  };
  op.adjoint = [calc, cp, hp, grid](const Block& X) -> Block {
    return pi1_adjoint_f(calc, cp, Block(hp->replicate(1, X.cols())), X, grid);
  };
  return op;
}

OperatorUnderTest OperatorUnderTest::scaled(double c) const {
  OperatorUnderTest op = *this;
  if (matrix) op.matrix = c * (*matrix);
  auto f = forward, a = adjoint;
  op.forward = [f, c](const Block& X) -> Block { return c * f(X); };
  op.adjoint = [a, c](const Block& X) -> Block { return c * a(X); };
  return op;
}

double adjoint_defect(const OperatorUnderTest& T, const Field& mu, std::uint64_t seed, int trials) {
  auto gen = substream(seed, "t1-adjoint");
  const Block F = normal_block(gen, mu.size(), trials), G = normal_block(gen, mu.size(), trials);
  const Block TF = T.forward(F), TsG = T.adjoint(G);
  double worst = 0.0;
  for (int c = 0; c < trials; ++c) {
    const double lhs = inner(Field(TF.col(c)), Field(G.col(c)), mu);
    const double rhs = inner(Field(F.col(c)), Field(TsG.col(c)), mu);
    const double scale = std::max(lp_norm(Field(TF.col(c)), 2.0, mu) * lp_norm(Field(G.col(c)), 2.0, mu),
                                  lp_norm(Field(F.col(c)), 2.0, mu) * lp_norm(Field(TsG.col(c)), 2.0, mu));
    if (scale > 0.0) worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

// ---- hypotheses ----------------------------------------------------------------

OffDiagonalTable check_off_diagonal(const OperatorUnderTest& T, const Calculus& calc, const ScaleGrid& grid,
                                    int kappa, const HarnessOptions& options) {
  if (kappa < 1) throw InvalidArgument("check_off_diagonal: kappa must be >= 1");
  if (grid.empty()) throw EmptyGrid("check_off_diagonal: empty scale grid");
  const Space& space = calc.space();
  const Field& mu = calc.measure();
  const double m = calc.generator().homogeneity();
  const std::vector<double> scales =
      scales_in_radius_range(grid, m, space.min_edge_length(), space.diameter() * options.max_radius_fraction,
                             options.scale_stride);
  const std::vector<Cell> cells = build_cells(space, scales, m, true, options);
  const SpectralFunction outer = fn::semigroup_derivative(kappa);

  std::vector<std::vector<PairRatio>> results(cells.size());
  parallel_cells(cells.size(), [&](std::size_t i) {
    const Cell& cell = cells[i];
    if (cell.q2.empty()) return;
    const Block E = transfer_inputs(cell.q1.members, mu, options.transfer);
    const Block image = calc.apply(outer, cell.s, T.forward(E));
    const Block adj_image = calc.apply(outer, cell.s, T.adjoint(E));
    for (std::size_t k = 0; k < cell.q2.size(); ++k) {
      PairRatio row;
      row.s = cell.s;
      row.r = cell.r;
      row.center1 = cell.q1.center;
      row.center2 = cell.q2[k].center;
      row.distance = cell.distance[k];
      row.ratio = transfer_norm_from_image(image, cell.q1.members.size(), cell.q2[k].members, mu, nullptr,
                                           options.transfer);
      row.adjoint_ratio = transfer_norm_from_image(adj_image, cell.q1.members.size(), cell.q2[k].members, mu,
                                                   nullptr, options.transfer);
      results[i].push_back(row);
    }
  });

  OffDiagonalTable table;
  for (auto& rows : results) table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  std::vector<double> fitted;
  for (double s : scales) {
    ScaleFit fit;
    fit.s = s;
    fit.r = std::pow(s, 1.0 / m);
    std::vector<double> x, ratio, adj;
    for (const PairRatio& row : table.rows)
      if (row.s == s) {
        x.push_back(row.distance / row.r);
        ratio.push_back(row.ratio);
        adj.push_back(row.adjoint_ratio);
      }
    fit.pairs = x.size();
    if (fit.pairs < 2) {
      fit.skipped = true;
    } else {
      // Identically vanishing ratios decay faster than any power.
      auto exponent = [&](const std::vector<double>& v) {
        const bool all_zero = std::all_of(v.begin(), v.end(), [](double a) { return a == 0.0; });
        return all_zero ? kInfinity : fit_decay_exponent(x, v);
      };
      fit.exponent = exponent(ratio);
      fit.adjoint_exponent = exponent(adj);
      if (std::isnan(fit.exponent) || std::isnan(fit.adjoint_exponent)) {
        fit.skipped = true;
      } else {
        fitted.push_back(fit.exponent);
        fitted.push_back(fit.adjoint_exponent);
      }
    }
    table.fits.push_back(fit);
  }
  table.min_exponent = fitted.empty() ? 0.0 : *std::min_element(fitted.begin(), fitted.end());
  table.median_exponent = median_of(fitted);
  return table;
}

WeakBoundTable check_weak_boundedness(const OperatorUnderTest& T, const Calculus& calc, const ScaleGrid& grid,
                                      int kappa, const HarnessOptions& options) {
  if (kappa < 1) throw InvalidArgument("check_weak_boundedness: kappa must be >= 1");
  if (grid.empty()) throw EmptyGrid("check_weak_boundedness: empty scale grid");
  const Space& space = calc.space();
  const Field& mu = calc.measure();
  const double m = calc.generator().homogeneity();
  const std::vector<double> scales =
      scales_in_radius_range(grid, m, space.min_edge_length(), space.diameter() / 2.0, options.scale_stride);
  const std::vector<Cell> cells = build_cells(space, scales, m, false, options);
  const SpectralFunction outer = fn::semigroup_derivative(kappa), heat = fn::exp_neg();
  const SpectralFunction inner1 = fn::semigroup_derivative(1), inner2 = fn::semigroup_derivative(2);

  std::vector<std::vector<WeakBoundRow>> results(cells.size());
  parallel_cells(cells.size(), [&](std::size_t i) {
    const Cell& cell = cells[i];
    if (cell.q2.empty()) return;
    const Block E = transfer_inputs(cell.q1.members, mu, options.transfer);
    const Block main = calc.apply(outer, cell.s, T.forward(calc.apply(heat, cell.s, E)));
    const Block adj = calc.apply(outer, cell.s, T.adjoint(calc.apply(heat, cell.s, E)));
    const Block k1 = calc.apply(outer, cell.s, T.forward(calc.apply(inner1, cell.s, E)));
    const Block k2 = calc.apply(outer, cell.s, T.forward(calc.apply(inner2, cell.s, E)));
    const std::size_t q1n = cell.q1.members.size();
    for (std::size_t k = 0; k < cell.q2.size(); ++k) {
      const auto& q2 = cell.q2[k].members;
      WeakBoundRow row;
      row.s = cell.s;
      row.center1 = cell.q1.center;
      row.center2 = cell.q2[k].center;
      row.distance = cell.distance[k];
      row.ratio = transfer_norm_from_image(main, q1n, q2, mu, nullptr, options.transfer);
      row.adjoint_ratio = transfer_norm_from_image(adj, q1n, q2, mu, nullptr, options.transfer);
      row.inner_k1 = transfer_norm_from_image(k1, q1n, q2, mu, nullptr, options.transfer);
      row.inner_k2 = transfer_norm_from_image(k2, q1n, q2, mu, nullptr, options.transfer);
      results[i].push_back(row);
    }
  });

  WeakBoundTable table;
  std::vector<double> all;
  for (auto& rows : results)
    for (const WeakBoundRow& row : rows) {
      table.rows.push_back(row);
      all.push_back(row.ratio);
      all.push_back(row.adjoint_ratio);
    }
  table.max_ratio = all.empty() ? 0.0 : *std::max_element(all.begin(), all.end());
  table.median_ratio = median_of(all);
  for (double s : scales) {
    std::vector<double> at;
    for (const WeakBoundRow& row : table.rows)
      if (row.s == s) at.push_back(row.ratio), at.push_back(row.adjoint_ratio);
    if (at.empty()) continue;
    const double top = *std::max_element(at.begin(), at.end()), mid = median_of(at);
    table.worst_spread = std::max(table.worst_spread, top == 0.0 ? 1.0 : (mid > 0.0 ? top / mid : kInfinity));
  }
  return table;
}

T1Result compute_t1(const OperatorUnderTest& T, const Calculus& calc, const ScaleGrid& grid, int kappa) {
  if (kappa < 1) throw InvalidArgument("compute_t1: kappa must be >= 1");
  const Field one = Field::Ones(static_cast<Eigen::Index>(calc.space().size()));
  T1Result res;
  res.t1 = T.apply(one);
  res.t1_star = T.apply_adjoint(one);
  Block both(one.size(), 2);
  both << res.t1, res.t1_star;
  std::vector<BmoReport> reports = bmo_l_norms(calc, both, grid);
  res.t1_bmo = std::move(reports[0]);
  res.t1_star_bmo = std::move(reports[1]);
  BmoOptions opt;
  opt.kappa = kappa;
  res.kappa_oscillation = kappa == 1 ? res.t1_bmo : bmo_l_norm(calc, res.t1, grid, opt);
  return res;
}

L2Estimate estimate_l2_norm(const OperatorUnderTest& T, const Field& mu, std::uint64_t seed, double tol,
                            std::size_t max_iterations, std::size_t random_starts) {
  const Eigen::Index n = mu.size();
  const auto R = std::min<Eigen::Index>(static_cast<Eigen::Index>(random_starts + 1), n);
  Block X(n, R);
  for (Eigen::Index i = 0; i < n; ++i) X(i, 0) = 1.0 + static_cast<double>(i) / static_cast<double>(n);
  if (R > 1) {
    auto gen = substream(seed, "l2-norm-starts");
    X.rightCols(R - 1) = normal_block(gen, n, R - 1);
  }
  // Subspace iteration on T*T in L2(mu): orthonormalize in the weighted
  // inner product, then take the Rayleigh-Ritz value of the block.
  const Field root = mu.cwiseSqrt();
  auto orthonormalize = [&](const Block& Z) {
    Eigen::HouseholderQR<Block> qr(root.asDiagonal() * Z);
    Block Q = qr.householderQ() * Block::Identity(n, Z.cols());
    return Block(root.cwiseInverse().asDiagonal() * Q);
  };
  X = orthonormalize(X);
  L2Estimate est;
  double prev = -1.0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Block Y = T.forward(X);
    const Eigen::MatrixXd G = Y.transpose() * mu.asDiagonal() * Y;
    const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    const double value = std::sqrt(std::max(top, 0.0));
    est.value = std::max(est.value, value);
    est.iterations = it + 1;
    if (value == 0.0 || (prev >= 0.0 && std::abs(value - prev) <= tol * value)) {
      est.converged = true;
      break;
    }
    prev = value;
    X = orthonormalize(T.adjoint(Y));
  }
  return est;
}

// ---- kernels -----------------------------------------------------------------------

namespace {

// C2 cutoff: 0 on the bounding box edge, 1 at depth >= width * extent, with
// vanishing first and second derivatives at both ends.
Field taper_profile(const Space& space, double width) {
  const auto n = static_cast<Eigen::Index>(space.size());
  Field chi = Field::Ones(n);
  if (!(width > 0.0)) return chi;
  const auto& c = space.coordinates();
  for (int axis = 0; axis < 2; ++axis) {
    double lo = c[0][axis], hi = c[0][axis];
    for (const Point2& p : c) lo = std::min(lo, p[axis]), hi = std::max(hi, p[axis]);
    if (hi - lo <= 0.0) continue;
    for (Eigen::Index x = 0; x < n; ++x) {
      const double depth = std::min(c[x][axis] - lo, hi - c[x][axis]);
      const double u = std::clamp(depth / (width * (hi - lo)), 0.0, 1.0);
      chi[x] *= u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    }
  }
  return chi;
}

}  // namespace

OperatorUnderTest make_cz_operator(const Space& space, const KernelSpec& spec) {
  using P = KernelSpec::Profile;
  const auto n = static_cast<Eigen::Index>(space.size());
  if ((spec.profile == P::Riesz || spec.profile == P::Sign) && !space.has_coordinates())
    throw InvalidArgument("make_cz_operator: built-in kernels need vertex coordinates");
  if (spec.profile == P::Custom && !spec.custom) throw InvalidArgument("make_cz_operator: custom kernel missing");
  if (spec.diagonal == KernelSpec::Diagonal::Prescribed && spec.prescribed.size() != n)
    throw InvalidArgument("make_cz_operator: prescribed T(1) has the wrong size");
  if (spec.taper > 0.0 && !space.has_coordinates())
    throw InvalidArgument("make_cz_operator: a taper needs vertex coordinates");
  const Field& mu = space.measure();
  const Field chi = taper_profile(space, spec.taper);

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y) continue;
      const auto vx = static_cast<Vertex>(x), vy = static_cast<Vertex>(y);
      const double d = space.distance(vx, vy);
      if (d > spec.truncation) continue;
      double k = 0.0;
      switch (spec.profile) {
        case P::Zero:
          break;
        case P::Riesz:
          k = (space.coordinates()[x][0] - space.coordinates()[y][0]) / std::pow(d, spec.gamma + 1.0);
          break;
        case P::Sign: {
          const double dx = space.coordinates()[y][0] - space.coordinates()[x][0];
          k = (dx > 0.0 ? 1.0 : (dx < 0.0 ? -1.0 : 0.0)) / std::pow(d, spec.gamma);
          break;
        }
        case P::Custom:
          k = spec.custom(vx, vy);
          break;
      }
      if (!std::isfinite(k)) {
        std::ostringstream msg;
        msg << "kernel is not finite at (" << x << ", " << y << ")";
        throw SingularSpec(msg.str());
      }
      T(x, y) = chi[x] * k * chi[y] * mu[y];
    }
  }
  if (spec.diagonal != KernelSpec::Diagonal::Zero) {
    const Field rows = T.rowwise().sum();
    for (Eigen::Index x = 0; x < n; ++x)
      T(x, x) = (spec.diagonal == KernelSpec::Diagonal::Prescribed ? spec.prescribed[x] : 0.0) - rows[x];
  }
  const char* name = spec.profile == P::Riesz ? "riesz" : spec.profile == P::Sign ? "sign"
                     : spec.profile == P::Zero ? "zero" : "custom";
  return OperatorUnderTest::from_matrix(std::move(T), mu, std::string("cz-") + name);
}

Eigen::MatrixXd read_kernel_csv(std::istream& in, std::size_t n) {
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N, N);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    long long r = 0, c = 0;
    double v = 0.0;
    if (!(ls >> r >> c >> v)) {
      if (lineno == 1) continue;  // header
      throw ParseError("kernel csv line " + std::to_string(lineno) + ": expected row,col,value");
    }
    if (r < 0 || c < 0 || r >= N || c >= N)
      throw ParseError("kernel csv line " + std::to_string(lineno) + ": index out of range");
    if (!std::isfinite(v)) throw SingularSpec("kernel csv line " + std::to_string(lineno) + ": non-finite value");
    T(r, c) = v;
  }
  return T;
}

KernelSmoothness kernel_smoothness(const Space& space, const Eigen::MatrixXd& T, double target, std::uint64_t seed,
                                   std::size_t samples) {
  const Field& mu = space.measure();
  auto gen = substream(seed, "kernel-smoothness");
  std::vector<double> x, diff;
  for (std::size_t k = 0; k < samples; ++k) {
    const auto v = static_cast<Vertex>(gen() % space.size());
    const auto& nbrs = space.adjacency()[v];
    if (nbrs.empty()) continue;
    const Vertex w = nbrs[gen() % nbrs.size()].vertex;
    const double delta = space.distance(v, w);
    for (Vertex y : ring_representatives(space, v)) {
      const double d = space.distance(v, y);
      if (d < 2.0 * delta) continue;
      x.push_back(d / delta);
      diff.push_back(std::abs(T(v, y) - T(w, y)) / mu[y]);
    }
  }
  KernelSmoothness res;
  res.target = target;
  res.samples = x.size();
  const bool all_zero = std::all_of(diff.begin(), diff.end(), [](double a) { return a == 0.0; });
  res.exponent = all_zero ? kInfinity : fit_decay_exponent(x, diff);
  res.pass = res.exponent >= target;
  return res;
}

// ---- report ------------------------------------------------------------------------

HypothesisReport t1_report(const OperatorUnderTest& T, const Calculus& calc, const ScaleGrid& grid, double d_hom,
                           const Thresholds& thresholds, const HarnessOptions& options) {
  HypothesisReport rep;
  rep.label = T.label;
  rep.kappa = T.kappa;
  rep.d_hom = d_hom;
  rep.exponent_threshold = d_hom + thresholds.exponent_margin;
  const Field& mu = calc.measure();

  rep.off_diagonal = check_off_diagonal(T, calc, grid, T.kappa, options);
  rep.weak_boundedness = check_weak_boundedness(T, calc, grid, T.kappa, options);
  rep.t1 = compute_t1(T, calc, grid, T.kappa);
  rep.l2 = estimate_l2_norm(T, mu, options.seed);
  rep.adjoint_defect = adjoint_defect(T, mu, options.seed);
  if (T.matrix) {
    const int N = CalculusPair::for_dimension(d_hom, calc.generator().homogeneity()).N;
    const double target =
        thresholds.smoothness_exponent > 0.0 ? thresholds.smoothness_exponent : d_hom + 3.0 * N + 1.0;
    rep.smoothness = kernel_smoothness(calc.space(), *T.matrix, target, options.seed);
  }

  std::size_t fitted = 0;
  for (const ScaleFit& f : rep.off_diagonal.fits) (f.skipped ? rep.skipped_scales : fitted) += 1;

  Verdict& v = rep.verdict;
  v.off_diagonal_pass = fitted > 0 && rep.off_diagonal.min_exponent >= rep.exponent_threshold;
  const WeakBoundTable& wb = rep.weak_boundedness;
  v.weak_boundedness_pass =
      !wb.rows.empty() && wb.worst_spread <= thresholds.near_ratio_factor * (1.0 + 1e-12);
  v.hypotheses_pass = v.off_diagonal_pass && v.weak_boundedness_pass;
  v.l2_converged = rep.l2.converged;
  v.adjoint_consistent = rep.adjoint_defect <= 1e-9;
  v.flagged = !v.hypotheses_pass || !v.l2_converged || !v.adjoint_consistent;

  std::ostringstream s;
  s << (v.hypotheses_pass ? "hypotheses hold" : "hypotheses fail");
  if (!v.off_diagonal_pass)
    s << " (off-diagonal exponent " << rep.off_diagonal.min_exponent << " < " << rep.exponent_threshold << ")";
  if (!v.weak_boundedness_pass)
    s << " (near ratios up to " << wb.worst_spread << "x their median at one scale)";
  s << "; T(1) BMO_L " << rep.t1.t1_bmo.norm << ", T*(1) BMO_L " << rep.t1.t1_star_bmo.norm;
  s << "; L2 estimate " << rep.l2.value << (v.l2_converged ? "" : " (not converged)");
  if (!v.adjoint_consistent) s << "; adjoint defect " << rep.adjoint_defect;
  if (rep.skipped_scales) s << "; " << rep.skipped_scales << " scale(s) without separated pairs";
  v.summary = s.str();
  return rep;
}

}  // namespace sgcalc
