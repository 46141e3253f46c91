#include "sgcalc/weights.hpp"

#include "sgcalc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sgcalc {
namespace {

// max over centers and radii of combine(avg_Q a, avg_Q b).
template <class Combine>
double ball_sup(const Space& space, const Field& a, const Field& b, std::span<const double> radius_grid,
                Combine combine) {
  if (radius_grid.empty()) radius_grid = space.canonical_radii();
  const std::size_t n = space.size();
  const Field& mu = space.measure();
  std::vector<double> per_center(n, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t x = 0; x < n; ++x) {
    const auto v = static_cast<Vertex>(x);
    auto order = space.by_distance(v);
    double sa = 0.0, sb = 0.0, best = 0.0;
    std::size_t done = 0;
    for (double r : radius_grid) {
      const std::size_t k = space.ball_size(v, r);
      if (k == done) continue;
      for (; done < k; ++done) {
        sa += a[order[done]] * mu[order[done]];
        sb += b[order[done]] * mu[order[done]];
      }
      const double mass = space.prefix_mass(v, k);
      best = std::max(best, combine(sa / mass, sb / mass));
    }
    per_center[x] = best;
  }
  return *std::max_element(per_center.begin(), per_center.end());
}

}  // namespace

Weight constant_weight(const Space& space, double c) {
  if (!(c > 0.0)) throw NonPositiveWeight("constant weight must be positive");
  return {Field::Constant(static_cast<Eigen::Index>(space.size()), c), "constant"};
}

Weight power_weight(const Space& space, double alpha, Vertex x0) {
  if (x0 < 0 || static_cast<std::size_t>(x0) >= space.size()) throw InvalidArgument("power_weight: bad x0");
  Field w(static_cast<Eigen::Index>(space.size()));
  for (std::size_t x = 0; x < space.size(); ++x) w[x] = std::pow(1.0 + space.distance(x0, static_cast<Vertex>(x)), alpha);
  return {w, "power(" + std::to_string(alpha) + ")"};
}

Weight checkerboard_weight(const Space& space, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw NonPositiveWeight("checkerboard values must be positive");
  const double h = space.min_edge_length() > 0.0 ? space.min_edge_length() : 1.0;
  Field w(static_cast<Eigen::Index>(space.size()));
  for (std::size_t x = 0; x < space.size(); ++x) {
    auto steps = static_cast<long long>(std::llround(space.distance(0, static_cast<Vertex>(x)) / h));
    w[x] = steps % 2 == 0 ? a : b;
  }
  return {w, "checkerboard"};
}

Vertex central_vertex(const Space& space) {
  if (!space.has_coordinates()) return 0;
  const auto& c = space.coordinates();
  double cx = 0.0, cy = 0.0;
  for (const auto& p : c) cx += p[0], cy += p[1];
  cx /= static_cast<double>(c.size());
  cy /= static_cast<double>(c.size());
  Vertex best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < c.size(); ++x) {
    double d = std::hypot(c[x][0] - cx, c[x][1] - cy);
    if (d < bd - 1e-12) bd = d, best = static_cast<Vertex>(x);
  }
  return best;
}

void validate_weight(const Space& space, const Weight& w) {
  if (static_cast<std::size_t>(w.values.size()) != space.size())
    throw InvalidArgument("weight length does not match the space");
  for (Eigen::Index i = 0; i < w.values.size(); ++i)
    if (!(w.values[i] > 0.0) || !std::isfinite(w.values[i]))
      throw NonPositiveWeight("weight at vertex " + std::to_string(i) + " is not positive");
}

double ap_characteristic(const Space& space, const Weight& w, double p, std::span<const double> radius_grid) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("ap_characteristic: p must be in (1, inf)");
  validate_weight(space, w);
  const Field sigma = w.values.array().pow(-1.0 / (p - 1.0));
  return ball_sup(space, w.values, sigma, radius_grid,
                  [p](double aw, double as) { return aw * std::pow(as, p - 1.0); });
}

double rh_characteristic(const Space& space, const Weight& w, double q, std::span<const double> radius_grid) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw InvalidArgument("rh_characteristic: q must be in [1, inf)");
  validate_weight(space, w);
  if (q == 1.0) return 1.0;
  const Field wq = w.values.array().pow(q);
  return ball_sup(space, wq, w.values, radius_grid,
                  [q](double awq, double aw) { return std::pow(awq, 1.0 / q) / aw; });
}

Weight duality_transform(const Weight& w, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("duality_transform: p must be in (1, inf)");
  const double pp = p / (p - 1.0);
  return {w.values.array().pow(1.0 - pp), w.name + "^(1-p')"};
}

double weighted_norm(const Space& space, const Field& f, double p, const Weight& w) {
  if (static_cast<std::size_t>(f.size()) != space.size()) throw InvalidArgument("weighted_norm: size mismatch");
  if (std::isinf(p)) return f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  if (!(p > 0.0)) throw InvalidArgument("weighted_norm: p must be positive");
  const Field& mu = space.measure();
  return std::pow((f.array().abs().pow(p) * w.values.array() * mu.array()).sum(), 1.0 / p);
}

DualityConsistency duality_consistency(const Space& space, double p, std::span<const double> alphas, Vertex x0,
                                       std::span<const double> radius_grid) {
  if (!(p > 2.0)) throw InvalidArgument("duality_consistency: p must exceed 2");
  DualityConsistency out;
  out.p = p;
  const double pp = p / (p - 1.0);
  const double s = 2.0 / pp;
  const double rh_exp = s / (s - 1.0);
  for (double a : alphas) {
    Weight w = power_weight(space, a, x0);
    Weight dual = duality_transform(w, p);
    out.alphas.push_back(a);
    out.ap_half.push_back(p / 2.0 > 1.0 ? ap_characteristic(space, w, p / 2.0, radius_grid) : 1.0);
    out.ap_dual.push_back(ap_characteristic(space, dual, pp, radius_grid));
    out.rh_dual.push_back(rh_characteristic(space, dual, rh_exp, radius_grid));
  }
  std::vector<std::size_t> idx(out.alphas.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return out.ap_half[a] < out.ap_half[b]; });
  out.monotone = true;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    const std::size_t a = idx[i - 1], b = idx[i];
    if (out.ap_dual[b] < out.ap_dual[a] * (1.0 - 1e-9) || out.rh_dual[b] < out.rh_dual[a] * (1.0 - 1e-9))
      out.monotone = false;
  }
  return out;
}

}  // namespace sgcalc
