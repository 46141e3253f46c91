#include "sgcalc/bmo.hpp"

#include "sgcalc/error.hpp"

#include <algorithm>
#include <cmath>

namespace sgcalc {
namespace {

// Column-wise max over rows with the smallest row index winning ties.
void column_argmax(const Block& A, std::vector<double>& best, std::vector<Vertex>& where) {
  best.assign(A.cols(), -1.0);
  where.assign(A.cols(), 0);
  for (Eigen::Index c = 0; c < A.cols(); ++c)
    for (Eigen::Index x = 0; x < A.rows(); ++x)
      if (A(x, c) > best[c]) best[c] = A(x, c), where[c] = static_cast<Vertex>(x);
}

}  // namespace

std::vector<BmoReport> bmo_l_norms(const Calculus& calc, const Block& F, const ScaleGrid& grid,
                                   const BmoOptions& options) {
  if (options.kappa < 1) throw InvalidArgument("bmo_l_norm: kappa must be >= 1");
  const Space& sp = calc.space();
  const Field& mu = calc.measure();
  const double m = calc.generator().homogeneity();
  std::vector<BmoReport> reports(F.cols());
  std::vector<double> best;
  std::vector<Vertex> where;
  for_each_scale(calc, fn::heat_complement(options.kappa), grid, F, [&](std::size_t j, const Block& G) {
    const double t = grid.t_at(j);
    const double r = std::pow(t, 1.0 / m);
    Block V = options.l2_average ? Block(G.array().square()) : Block(G.array().abs());
    V = mu.asDiagonal() * V;
    Block avg = ball_averages(sp, r, V);
    if (options.l2_average) avg = avg.cwiseSqrt();
    column_argmax(avg, best, where);
    const bool saturated = r >= sp.diameter();
    for (Eigen::Index c = 0; c < F.cols(); ++c) {
      BmoReport& rep = reports[c];
      rep.per_scale.push_back({t, r, best[c], where[c], saturated});
      if (best[c] > rep.norm) rep.norm = best[c], rep.witness = {where[c], r, t};
      if (!saturated) rep.norm_unsaturated = std::max(rep.norm_unsaturated, best[c]);
    }
  });
  return reports;
}

BmoReport bmo_l_norm(const Calculus& calc, const Field& f, const ScaleGrid& grid, const BmoOptions& options) {
  return bmo_l_norms(calc, Block(f), grid, options).front();
}

ClassicalBmo bmo_classical(const Space& space, const Field& f, std::span<const double> radius_grid) {
  if (static_cast<std::size_t>(f.size()) != space.size()) throw InvalidArgument("bmo_classical: size mismatch");
  if (radius_grid.empty()) radius_grid = space.canonical_radii();
  const std::size_t n = space.size();
  const Field& mu = space.measure();
  std::vector<ClassicalBmo> per_center(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t x = 0; x < n; ++x) {
    const auto v = static_cast<Vertex>(x);
    auto order = space.by_distance(v);
    ClassicalBmo& best = per_center[x];
    best.center = v;
    best.norm = 0.0;
    std::size_t prev = 0;
    double wsum = 0.0;
    for (double r : radius_grid) {
      const std::size_t k = space.ball_size(v, r);
      if (k == prev) continue;
      for (std::size_t i = prev; i < k; ++i) wsum += f[order[i]] * mu[order[i]];
      prev = k;
      const double mass = space.prefix_mass(v, k);
      const double mean = wsum / mass;
      double osc = 0.0;
      for (std::size_t i = 0; i < k; ++i) osc += std::abs(f[order[i]] - mean) * mu[order[i]];
      osc /= mass;
      if (osc > best.norm) best.norm = osc, best.radius = r;
    }
  }
  ClassicalBmo out;
  for (const ClassicalBmo& c : per_center)
    if (c.norm > out.norm) out = c;
  return out;
}

std::vector<CarlesonReport> carleson_norms(const Calculus& calc, const Block& F, int k, const ScaleGrid& grid) {
  if (k < 1) throw InvalidArgument("carleson_norm: k must be >= 1");
  const Space& sp = calc.space();
  const Field& mu = calc.measure();
  const double m = calc.generator().homogeneity();
  std::vector<CarlesonReport> reports(F.cols());
  for (auto& r : reports) r.k = k;
  Block acc = Block::Zero(F.rows(), F.cols());
  std::vector<double> best;
  std::vector<Vertex> where;
  for_each_scale(calc, fn::carleson(k), grid, F, [&](std::size_t j, const Block& G) {
    // The box edge t_j = r^m sits at the centre of node j's log-cell, so that
    // node enters with half its weight; this keeps box masses consistent
    // between a grid and its refinement.
    const Block cell = grid.weight(j) * (mu.asDiagonal() * Block(G.array().square()));
    const double t = grid.t_at(j);
    const double r = std::pow(t, 1.0 / m);
    Block avg = ball_averages(sp, r, Block(acc + 0.5 * cell));
    acc += cell;
    column_argmax(avg, best, where);
    const bool saturated = r >= sp.diameter();
    for (Eigen::Index c = 0; c < F.cols(); ++c) {
      CarlesonReport& rep = reports[c];
      rep.per_scale.push_back({t, r, best[c], where[c], saturated});
      if (best[c] > rep.norm) rep.norm = best[c], rep.witness = {where[c], r, t};
    }
  });
  return reports;
}

CarlesonReport carleson_norm(const Calculus& calc, const Field& f, int k, const ScaleGrid& grid) {
  return carleson_norms(calc, Block(f), k, grid).front();
}

double m_membership_norm(const Space& space, const Field& f, Vertex x0, double beta, double N) {
  if (x0 < 0 || static_cast<std::size_t>(x0) >= space.size()) throw InvalidArgument("m_membership_norm: bad x0");
  if (!(beta > 0.0)) throw InvalidArgument("m_membership_norm: beta must be positive");
  const Field& mu = space.measure();
  double total = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    const double d = space.distance(x0, static_cast<Vertex>(x));
    total += std::abs(f[x]) * mu[x] / (std::pow(1.0 + d, 2.0 * N + beta) * space.ball_mass(x0, 1.0 + d));
  }
  return total;
}

Block sharp_maximal(const Calculus& calc, const Block& H, double s, const ScaleGrid& grid,
                    const SpectralFunction& psi) {
  if (!(s >= 1.0) || !std::isfinite(s)) throw InvalidArgument("sharp_maximal: s must be in [1, inf)");
  const Space& sp = calc.space();
  const Field& mu = calc.measure();
  const double m = calc.generator().homogeneity();
  Block out = Block::Zero(H.rows(), H.cols());
  for_each_scale(calc, psi, grid, H, [&](std::size_t j, const Block& G) {
    const double r = std::pow(grid.t_at(j), 1.0 / m);
    Block V = mu.asDiagonal() * Block(G.array().abs().pow(s));
    out = out.cwiseMax(ball_averages(sp, r, V));
  });
  return out.array().pow(1.0 / s);
}

Field sharp_maximal(const Calculus& calc, const Field& h, double s, const ScaleGrid& grid,
                    const SpectralFunction& psi) {
  return sharp_maximal(calc, Block(h), s, grid, psi).col(0);
}

}  // namespace sgcalc
