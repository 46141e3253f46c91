#include "sgcalc/semigroup_checks.hpp"

#include "sgcalc/error.hpp"
#include "sgcalc/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgcalc {

std::string OperatorFamily::label() const {
  switch (kind) {
    case Kind::Heat:
      return "heat";
    case Kind::HeatDerivative:
      return "heat-derivative-" + std::to_string(k);
    case Kind::GradientHeat:
      return "gradient-heat-" + std::to_string(k);
  }
  return "unknown";
}

Block transfer_inputs(std::span<const Vertex> q1, const Field& mu, const TransferOptions& options) {
  if (q1.empty()) throw EmptyBall("transfer_inputs: empty ball");
  const Eigen::Index n = mu.size();
  const auto k1 = static_cast<Eigen::Index>(q1.size());
  Block E;
  if (q1.size() <= options.exact_limit) {
    E = Block::Zero(n, k1);
    for (Eigen::Index i = 0; i < k1; ++i) E(q1[i], i) = 1.0 / std::sqrt(mu[q1[i]]);
    return E;
  }
  auto gen = substream(options.seed, "transfer-probes");
  Block R = normal_block(gen, k1, static_cast<Eigen::Index>(options.probes));
  E = Block::Zero(n, R.cols());
  for (Eigen::Index c = 0; c < R.cols(); ++c) {
    const double nrm = R.col(c).norm();
    for (Eigen::Index i = 0; i < k1; ++i) E(q1[i], c) = R(i, c) / (nrm * std::sqrt(mu[q1[i]]));
  }
  return E;
}

double transfer_norm_from_image(const Block& image, std::size_t q1_size, std::span<const Vertex> q2, const Field& mu,
                                const SparseMatrix* grad_rows, const TransferOptions& options) {
  if (q2.empty()) throw EmptyBall("transfer_norm: empty ball");
  Block A;
  if (grad_rows) {
    A = (*grad_rows) * image;
  } else {
    A.resize(static_cast<Eigen::Index>(q2.size()), image.cols());
    for (std::size_t i = 0; i < q2.size(); ++i) A.row(i) = std::sqrt(mu[q2[i]]) * image.row(q2[i]);
  }
  if (q1_size <= options.exact_limit) {
    Eigen::MatrixXd G = A.transpose() * A;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  return A.colwise().norm().maxCoeff();
}

double transfer_norm(const BlockOperator& op, std::span<const Vertex> q1, std::span<const Vertex> q2,
                     const Field& mu, const SparseMatrix* grad_rows, const TransferOptions& options) {
  if (q1.empty() || q2.empty()) throw EmptyBall("transfer_norm: empty ball");
  return transfer_norm_from_image(op(transfer_inputs(q1, mu, options)), q1.size(), q2, mu, grad_rows, options);
}

double fit_decay_exponent(std::span<const double> x, std::span<const double> ratio) {
  double su = 0, sl = 0, suu = 0, sul = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(ratio[i] > 0.0) || !std::isfinite(ratio[i])) continue;
    const double u = std::log1p(x[i]), l = std::log(ratio[i]);
    su += u;
    sl += l;
    suu += u * u;
    sul += u * l;
    ++cnt;
  }
  const double den = cnt * suu - su * su;
  if (cnt < 2 || !(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return -(cnt * sul - su * sl) / den;
}

DecayTable off_diagonal_profile(const Calculus& calc, const OperatorFamily& family, double s,
                                const std::vector<BallPair>& pairs, const TransferOptions& options) {
  if (!(s > 0.0)) throw InvalidArgument("off_diagonal_profile: s must be positive");
  const Generator& gen = calc.generator();
  const Field& mu = calc.measure();
  const double r = std::pow(s, 1.0 / gen.homogeneity());
  const SpectralFunction g = family.kind == OperatorFamily::Kind::Heat ? fn::exp_neg()
                                                                        : fn::semigroup_derivative(family.k);
  const double grad_scale = family.kind == OperatorFamily::Kind::GradientHeat ? r : 1.0;
  BlockOperator op = [&](const Block& X) -> Block { return grad_scale * calc.apply(g, s, X); };

  DecayTable table;
  table.family = family.label();
  std::vector<double> xs, rs;
  for (const BallPair& p : pairs) {
    if (p.q1.members.empty() || p.q2.members.empty()) throw EmptyBall("off_diagonal_profile: empty ball");
    SparseMatrix D;
    const SparseMatrix* rows = nullptr;
    if (family.kind == OperatorFamily::Kind::GradientHeat) {
      D = gradient_operator(gen, p.q2.members);
      rows = &D;
    }
    DecayRow row;
    row.s = s;
    row.r = r;
    row.center1 = p.q1.center;
    row.center2 = p.q2.center;
    row.distance = set_distance(gen.space(), p.q1.members, p.q2.members);
    row.ratio = transfer_norm(op, p.q1.members, p.q2.members, mu, rows, options);
    table.rows.push_back(row);
    xs.push_back(row.distance / r);
    rs.push_back(row.ratio);
  }
  table.fitted_exponent = fit_decay_exponent(xs, rs);
  std::vector<double> sorted_x(xs);
  std::sort(sorted_x.begin(), sorted_x.end());
  if (!sorted_x.empty()) {
    const double median = sorted_x[sorted_x.size() / 2];
    std::vector<double> nx, nr, fx, fr;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] <= median) nx.push_back(xs[i]), nr.push_back(rs[i]);
      if (xs[i] >= median) fx.push_back(xs[i]), fr.push_back(rs[i]);
    }
    table.near_exponent = fit_decay_exponent(nx, nr);
    table.far_exponent = fit_decay_exponent(fx, fr);
  }
  return table;
}

SobolevResult resolvent_sobolev_check(const Calculus& calc, double t, int M_pow, const Ball& ball, const Field& f) {
  if (M_pow < 1) throw InvalidArgument("resolvent_sobolev_check: M must be >= 1");
  if (ball.members.empty()) throw EmptyBall("resolvent_sobolev_check: empty ball");
  Field g = calc.apply(fn::resolvent_growth(M_pow), t, f);
  Field Mg = maximal(calc.space(), g, 2.0);
  SobolevResult res;
  res.rhs = std::numeric_limits<double>::infinity();
  for (Vertex v : ball.members) {
    res.lhs = std::max(res.lhs, std::abs(f[v]));
    res.rhs = std::min(res.rhs, Mg[v]);
  }
  res.ratio = res.rhs > 0.0 ? res.lhs / res.rhs : (res.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return res;
}

SobolevSweep resolvent_sobolev_sweep(const Calculus& calc, double t, int M_pow, const Field& f) {
  if (M_pow < 1) throw InvalidArgument("resolvent_sobolev_sweep: M must be >= 1");
  const Space& sp = calc.space();
  const double r = std::pow(t, 1.0 / calc.generator().homogeneity());
  Field g = calc.apply(fn::resolvent_growth(M_pow), t, f);
  Field Mg = maximal(sp, g, 2.0);
  SobolevSweep out;
  out.radius = r;
  for (std::size_t x = 0; x < sp.size(); ++x) {
    double lhs = 0.0, rhs = std::numeric_limits<double>::infinity();
    for (Vertex v : sp.ball_members(static_cast<Vertex>(x), r)) {
      lhs = std::max(lhs, std::abs(f[v]));
      rhs = std::min(rhs, Mg[v]);
    }
    double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (ratio > out.max_ratio) out.max_ratio = ratio, out.witness_center = static_cast<Vertex>(x);
  }
  return out;
}

LimitsReport limits_check(const Calculus& calc, const Field& f, const ScaleGrid& grid, int k, double tolerance) {
  if (k < 1) throw InvalidArgument("limits_check: k must be >= 1");
  if (grid.empty()) throw EmptyGrid("limits_check: empty scale grid");
  const Field& mu = calc.measure();
  const Field centered = f.array() - constant_part(f, mu);
  const double fn2 = lp_norm(f, 2.0, mu);
  const double cn2 = lp_norm(centered, 2.0, mu);

  LimitsReport rep;
  rep.k = k;
  rep.t = grid.t();
  Block F(f.size(), 2);
  F.col(0) = f;
  F.col(1) = centered;
  PreparedInput in = calc.prepare(F, calc.generator().dense_available());
  const SpectralFunction heat = fn::exp_neg(), der = fn::semigroup_derivative(k);
  for (double t : grid.t()) {
    Block H = calc.apply(heat, t, in);
    Block D = calc.apply(der, t, in);
    rep.heat_defect.push_back(lp_norm(Field(H.col(0) - f), 2.0, mu));
    rep.derivative_norm.push_back(lp_norm(Field(D.col(0)), 2.0, mu));
    rep.centered_derivative.push_back(lp_norm(Field(D.col(1)), 2.0, mu));
  }
  rep.small_t_heat = rep.heat_defect.front() <= tolerance * fn2;
  rep.small_t_derivative = rep.derivative_norm.front() <= tolerance * fn2;
  rep.large_t_centered = rep.centered_derivative.back() <= tolerance * std::max(cn2, 1e-300) || cn2 == 0.0;
  rep.monotone_tail = true;
  const double t_star = k / calc.generator().lambda_min_positive();
  for (std::size_t j = 1; j < rep.t.size(); ++j)
    if (rep.t[j - 1] >= t_star && rep.centered_derivative[j] > rep.centered_derivative[j - 1] * (1.0 + 1e-9) + 1e-300)
      rep.monotone_tail = false;
  return rep;
}

}  // namespace sgcalc
