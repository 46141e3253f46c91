#include "sgcalc/calculus.hpp"

#include "sgcalc/error.hpp"
#include "sgcalc/rng.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace sgcalc {
namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Chebyshev coefficients of the degree-K interpolant at the Lobatto points
// cos(pi j / K), via a type-I DCT.
std::vector<double> lobatto_coefficients(const std::vector<double>& samples) {
  const std::size_t K = samples.size() - 1;
  std::vector<double> in(samples), out(K + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_r2r_1d(static_cast<int>(K + 1), in.data(), out.data(), FFTW_REDFT00, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  for (double& c : out) c /= static_cast<double>(K);
  out.front() *= 0.5;
  out.back() *= 0.5;
  return out;
}

}  // namespace

Calculus::Calculus(GeneratorPtr gen, CalculusOptions options) : gen_(std::move(gen)), options_(options) {
  if (!gen_) throw InvalidArgument("Calculus: null generator");
}

void Calculus::check_finite(const SpectralFunction& g, double t) const {
  if (!std::isfinite(g.at_zero)) throw FunctionDomainError(g.name + " is not finite at 0");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("scale t must be finite and >= 0");
}

PreparedInput Calculus::prepare(const Block& F, bool with_modal) const {
  const Field& mu = measure();
  if (F.rows() != mu.size()) throw InvalidArgument("field length does not match the space");
  PreparedInput in;
  in.mean = (mu.transpose() * F) / mu.sum();
  in.centered = F.rowwise() - in.mean;
  if (with_modal && gen_->dense_available()) {
    const Eigensystem& eig = gen_->eigensystem();
    in.modal = eig.vectors.transpose() * (mu.asDiagonal() * in.centered);
  }
  return in;
}

std::pair<Eigen::Index, Eigen::Index> Calculus::active_modes(const SpectralFunction& g, double t) const {
  const Eigensystem& eig = gen_->eigensystem();
  const Eigen::Index n = eig.values.size();
  double peak = 0.0;
  Eigen::VectorXd vals(n);
  for (Eigen::Index i = 1; i < n; ++i) {
    vals[i] = g(t * eig.values[i]);
    if (!std::isfinite(vals[i]))
      throw FunctionDomainError(g.name + " is not finite at u = " + std::to_string(t * eig.values[i]));
    peak = std::max(peak, std::abs(vals[i]));
  }
  Eigen::Index lo = n, hi = 0;
  const double cut = 1e-17 * peak;
  for (Eigen::Index i = 1; i < n; ++i)
    if (std::abs(vals[i]) > cut) {
      lo = std::min(lo, i);
      hi = i;
    }
  return {lo, hi};
}

Block Calculus::apply_dense(const SpectralFunction& g, double t, const PreparedInput& in) const {
  const Eigensystem& eig = gen_->eigensystem();
  const Field& mu = measure();
  const Eigen::Index n = mu.size();
  Block out = Eigen::VectorXd::Ones(n) * (g.at_zero * in.mean);
  auto [lo, hi] = active_modes(g, t);
  if (lo > hi) return out;
  const Eigen::Index a = hi - lo + 1;
  Eigen::VectorXd scale(a);
  for (Eigen::Index i = 0; i < a; ++i) scale[i] = g(t * eig.values[lo + i]);
  const auto V = eig.vectors.middleCols(lo, a);
  Block coeffs = in.modal ? Block(in.modal->middleRows(lo, a)) : Block(V.transpose() * (mu.asDiagonal() * in.centered));
  coeffs = scale.asDiagonal() * coeffs;
  out.noalias() += V * coeffs;
  return out;
}

std::optional<std::vector<double>> Calculus::chebyshev_coefficients(const SpectralFunction& g, double t,
                                                                    std::size_t degree_cap) const {
  if (auto hit = gen_->cached_chebyshev(g.name, t)) {
    if (hit->size() - 1 <= degree_cap) return hit;
    return std::nullopt;
  }
  const double b = gen_->spectral_upper_bound();
  const double tol = options_.chebyshev_tol;
  for (std::size_t K = 16; K <= std::max<std::size_t>(16, 2 * degree_cap); K *= 2) {
    std::vector<double> samples(K + 1);
    double scale = 0.0;
    for (std::size_t j = 0; j <= K; ++j) {
      double x = std::cos(M_PI * static_cast<double>(j) / static_cast<double>(K));
      double u = t * b * 0.5 * (x + 1.0);
      samples[j] = g(u);
      if (!std::isfinite(samples[j])) throw FunctionDomainError(g.name + " is not finite at u = " + std::to_string(u));
      scale = std::max(scale, std::abs(samples[j]));
    }
    if (scale == 0.0) {
      std::vector<double> zero{0.0};
      gen_->store_chebyshev(g.name, t, zero);
      return zero;
    }
    std::vector<double> c = lobatto_coefficients(samples);
    double tail = 0.0;
    for (std::size_t k = K - 3; k <= K; ++k) tail = std::max(tail, std::abs(c[k]));
    if (tail <= 0.25 * tol * scale) {
      std::size_t last = 0;
      for (std::size_t k = 0; k <= K; ++k)
        if (std::abs(c[k]) > 0.01 * tol * scale) last = k;
      c.resize(last + 1);
      if (last > degree_cap) return std::nullopt;
      gen_->store_chebyshev(g.name, t, c);
      return c;
    }
    if (K > degree_cap) break;
  }
  return std::nullopt;
}

Block Calculus::apply_chebyshev(const std::vector<double>& c, const Block& centered) const {
  const SparseMatrix& L = gen_->matrix();
  const double s = 2.0 / gen_->spectral_upper_bound();
  auto Y = [&](const Block& X) -> Block { return s * (L * X) - X; };
  const std::size_t K = c.size() - 1;
  if (K == 0) return c[0] * centered;
  Block b1 = c[K] * centered;  // b_{k+1}
  Block b2 = Block::Zero(centered.rows(), centered.cols());
  for (std::size_t k = K - 1; k >= 1; --k) {
    Block bk = 2.0 * Y(b1) - b2 + c[k] * centered;
    b2 = std::move(b1);
    b1 = std::move(bk);
  }
  return Y(b1) - b2 + c[0] * centered;
}

ActionPath Calculus::choose_path(const SpectralFunction& g, double t, Eigen::Index cols, bool modal_ready) const {
  if (!gen_->dense_available()) return ActionPath::Chebyshev;
  const auto n = static_cast<double>(gen_->size());
  double active = n;
  if (gen_->has_eigensystem()) {
    auto [lo, hi] = active_modes(g, t);
    active = lo > hi ? 0.0 : static_cast<double>(hi - lo + 1);
  }
  const double dense_cost = n * active * (modal_ready ? 1.0 : 2.0) * static_cast<double>(cols) + n;
  const double step = options_.sparse_penalty * (static_cast<double>(gen_->matrix().nonZeros()) + 3.0 * n) *
                      static_cast<double>(cols);
  const auto cap = static_cast<std::size_t>(std::min<double>(dense_cost / step, options_.chebyshev_max_degree));
  return chebyshev_coefficients(g, t, cap) ? ActionPath::Chebyshev : ActionPath::Dense;
}

Block Calculus::apply(const SpectralFunction& g, double t, const PreparedInput& in, ActionPath path) const {
  check_finite(g, t);
  if (t == 0.0) return Eigen::VectorXd::Ones(in.centered.rows()) * (g.at_zero * in.mean) + g.at_zero * in.centered;
  if (path == ActionPath::Auto) path = choose_path(g, t, in.centered.cols(), in.modal.has_value());
  if (path == ActionPath::Dense) return apply_dense(g, t, in);
  auto c = chebyshev_coefficients(g, t, options_.chebyshev_max_degree);
  if (!c)
    throw Error("Chebyshev expansion of " + g.name + " at t = " + std::to_string(t) + " exceeds degree " +
                std::to_string(options_.chebyshev_max_degree));
  Block out = apply_chebyshev(*c, in.centered);
  out.rowwise() += g.at_zero * in.mean;
  return out;
}

Block Calculus::apply(const SpectralFunction& g, double t, const Block& F, ActionPath path) const {
  return apply(g, t, prepare(F), path);
}

Field Calculus::apply(const SpectralFunction& g, double t, const Field& f, ActionPath path) const {
  return apply(g, t, prepare(Block(f)), path).col(0);
}

Field apply_function(const Calculus& calc, const SpectralFunction& g, double t, const Field& f, ActionPath path) {
  return calc.apply(g, t, f, path);
}

Field semigroup(const Calculus& calc, double t, const Field& f, ActionPath path) {
  return calc.apply(fn::exp_neg(), t, f, path);
}

Field semigroup_derivative(const Calculus& calc, int k, double t, const Field& f, ActionPath path) {
  return calc.apply(fn::semigroup_derivative(k), t, f, path);
}

// ---- gradients --------------------------------------------------------------

Block gradient(const Generator& gen, const Block& F) {
  const Space& sp = gen.space();
  const auto& adj = sp.adjacency();
  const auto& A = gen.coefficients();
  Block out(F.rows(), F.cols());
  for (std::size_t x = 0; x < sp.size(); ++x) {
    double wsum = 0.0;
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(F.cols());
    for (const Neighbor& nb : adj[x]) {
      const double w = A[nb.edge];
      wsum += w;
      acc += (w / (nb.length * nb.length)) * (F.row(nb.vertex) - F.row(x)).array().square().matrix();
    }
    if (wsum > 0.0)
      out.row(x) = (acc / wsum).cwiseSqrt();
    else
      out.row(x).setZero();
  }
  return out;
}

Field gradient(const Generator& gen, const Field& f) { return gradient(gen, Block(f)).col(0); }

Field ball_gradient(const Generator& gen, const Field& f, std::span<const Vertex> members) {
  const Space& sp = gen.space();
  std::vector<char> inside(sp.size(), 0);
  for (Vertex v : members) inside[v] = 1;
  const auto& A = gen.coefficients();
  Field out(static_cast<Eigen::Index>(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i) {
    const Vertex x = members[i];
    double wsum = 0.0, acc = 0.0;
    for (const Neighbor& nb : sp.adjacency()[x]) {
      if (!inside[nb.vertex]) continue;
      const double w = A[nb.edge];
      const double d = f[nb.vertex] - f[x];
      wsum += w;
      acc += w * d * d / (nb.length * nb.length);
    }
    out[static_cast<Eigen::Index>(i)] = wsum > 0.0 ? std::sqrt(acc / wsum) : 0.0;
  }
  return out;
}

BallGradient ball_gradient_fn(const GeneratorPtr& gen) {
  return [gen](const Field& f, std::span<const Vertex> members) { return ball_gradient(*gen, f, members); };
}

SparseMatrix gradient_operator(const Generator& gen, std::span<const Vertex> region) {
  const Space& sp = gen.space();
  const auto& A = gen.coefficients();
  const Field& mu = sp.measure();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::Index row = 0;
  for (Vertex x : region) {
    double wsum = 0.0;
    for (const Neighbor& nb : sp.adjacency()[x]) wsum += A[nb.edge];
    if (wsum <= 0.0) continue;
    for (const Neighbor& nb : sp.adjacency()[x]) {
      const double c = std::sqrt(mu[x] * A[nb.edge] / wsum) / nb.length;
      trip.emplace_back(row, nb.vertex, c);
      trip.emplace_back(row, x, -c);
      ++row;
    }
  }
  SparseMatrix D(row, static_cast<Eigen::Index>(sp.size()));
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

// ---- multi-scale helpers ---------------------------------------------------------

void for_each_scale(const Calculus& calc, const SpectralFunction& g, const ScaleGrid& grid, const Block& F,
                    const std::function<void(std::size_t, const Block&)>& visit) {
  const bool dense = calc.generator().dense_available();
  PreparedInput in = calc.prepare(F, dense);
  for (std::size_t j = 0; j < grid.size(); ++j) visit(j, calc.apply(g, grid.t_at(j), in));
}

SquareFunctionResult square_function(const Calculus& calc, const Field& f, const SquareFunctionVariant& variant,
                                     const ScaleGrid& grid) {
  const Generator& gen = calc.generator();
  const Field& mu = calc.measure();
  const double m = gen.homogeneity();
  SquareFunctionResult res;
  Field acc = Field::Zero(f.size());

  const SpectralFunction g = variant.kind == SquareFunctionVariant::Kind::Holomorphic
                                 ? variant.g
                                 : fn::semigroup_derivative(variant.k);
  for_each_scale(calc, g, grid, Block(f), [&](std::size_t j, const Block& G) {
    const double t = grid.t_at(j);
    if (variant.kind == SquareFunctionVariant::Kind::Holomorphic) {
      acc += grid.weight(j) * G.col(0).array().square().matrix();
    } else {
      Field grad = std::pow(t, 1.0 / m) * gradient(gen, Field(G.col(0)));
      acc += grid.weight(j) * grad.array().square().matrix();
    }
  });
  res.pointwise = acc.cwiseSqrt();
  res.l2_norm = lp_norm(res.pointwise, 2.0, mu);

  if (variant.kind == SquareFunctionVariant::Kind::Holomorphic) {
    std::vector<double> lambdas;
    if (gen.dense_available()) {
      const auto& v = gen.eigensystem().values;
      lambdas.assign(v.data() + 1, v.data() + v.size());
    } else {
      const double lo = gen.lambda_min_positive(), hi = gen.lambda_max();
      for (int i = 0; i <= 2000; ++i) lambdas.push_back(lo * std::pow(hi / lo, i / 2000.0));
    }
    double wsum = 0.0;
    for (double w : grid.weights()) wsum += w;
    double best = std::abs(variant.g.at_zero) * std::sqrt(wsum);
    for (double lam : lambdas) {
      double s = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        double v = variant.g(grid.t_at(j) * lam);
        s += grid.weight(j) * v * v;
      }
      best = std::max(best, std::sqrt(s));
    }
    res.operator_norm = best;
  } else {
    // Lower bound from probing with low modes and seeded random fields.
    auto rng = substream(gen.fingerprint(), "square-function-probe");
    std::vector<Field> probes;
    if (gen.dense_available()) {
      const auto& V = gen.eigensystem().vectors;
      for (Eigen::Index i = 1; i < std::min<Eigen::Index>(V.cols(), 9); ++i) probes.emplace_back(V.col(i));
      for (Eigen::Index i = std::max<Eigen::Index>(1, V.cols() - 4); i < V.cols(); ++i) probes.emplace_back(V.col(i));
    }
    for (int r = 0; r < 4; ++r) probes.push_back(normal_field(rng, f.size()));
    double best = 0.0;
    for (const Field& p : probes) {
      Field acc_p = Field::Zero(p.size());
      for_each_scale(calc, g, grid, Block(p), [&](std::size_t j, const Block& G) {
        Field grad = std::pow(grid.t_at(j), 1.0 / m) * gradient(gen, Field(G.col(0)));
        acc_p += grid.weight(j) * grad.array().square().matrix();
      });
      double num = lp_norm(acc_p.cwiseSqrt(), 2.0, mu), den = lp_norm(p, 2.0, mu);
      if (den > 0.0) best = std::max(best, num / den);
    }
    res.operator_norm = best;
  }
  return res;
}

}  // namespace sgcalc
