#include "sgcalc/mixed_norm.hpp"

#include "sgcalc/error.hpp"
#include "sgcalc/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sgcalc {
namespace {

double conjugate(double p) {
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return kInf;
  return p / (p - 1.0);
}

// |x|^(e) sign(x) column-wise, entries below `floor_rel` * max|column| clamped.
Block signed_power(const Block& X, double e, double floor_rel) {
  Block out(X.rows(), X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double mx = X.col(c).cwiseAbs().maxCoeff();
    const double fl = floor_rel * mx;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double v = X(i, c);
      if (e == 0.0) {
        out(i, c) = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      } else {
        const double a = std::max(std::abs(v), fl);
        out(i, c) = v == 0.0 && e > 0.0 ? 0.0 : std::copysign(std::pow(a, e), v == 0.0 ? 1.0 : v);
      }
    }
  }
  return out;
}

// The element of the unit sphere of L^p(nu) maximizing the pairing with W,
// where W is given as a dual-space gradient. Zero columns get a fallback.
Block dual_direction(const Block& W, const Field& nu, double p) {
  const double pc = conjugate(p);
  Block X = std::isinf(p) ? signed_power(W, 0.0, 0.0) : signed_power(W, pc - 1.0, 0.0);
  Eigen::RowVectorXd n = column_norms(X, nu, p);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    if (n[c] > 0.0 && std::isfinite(n[c]))
      X.col(c) /= n[c];
    else
      X.col(c).setZero();
  }
  return X;
}

// Gradient of ||y||_r at y (up to positive scaling): |y|^(r-1) sign(y). For
// r < 1 the small entries are clamped since the map is singular there.
Block output_dual(const Block& Y, double r) {
  if (r == 1.0) return signed_power(Y, 0.0, 0.0);
  return signed_power(Y, r - 1.0, r < 1.0 ? 1e-8 : 0.0);
}

Block normalize_columns(Block X, const Field& nu, double p) {
  Eigen::RowVectorXd n = column_norms(X, nu, p);
  for (Eigen::Index c = 0; c < X.cols(); ++c)
    if (n[c] > 0.0) X.col(c) /= n[c];
  return X;
}

void check_exponent(double p, const char* what) {
  if (!(p > 1.0)) throw InvalidArgument(std::string("mixed_norm_estimate: ") + what + " must be in (1, inf]");
}

}  // namespace

Eigen::RowVectorXd column_norms(const Block& X, const Field& mu, double p) {
  Eigen::RowVectorXd out(X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    if (std::isinf(p))
      out[c] = X.rows() ? X.col(c).cwiseAbs().maxCoeff() : 0.0;
    else if (p == 2.0)
      out[c] = std::sqrt((X.col(c).array().square() * mu.array()).sum());
    else
      out[c] = std::pow((X.col(c).array().abs().pow(p) * mu.array()).sum(), 1.0 / p);
  }
  return out;
}

MixedNormResult mixed_norm_estimate(const LinearAction& A, const Field& mu, double p, double r,
                                    const MixedNormOptions& options) {
  check_exponent(p, "p");
  if (!(r > 0.5) || std::isinf(r)) throw InvalidArgument("mixed_norm_estimate: r must be in (1/2, inf)");
  const Eigen::Index n = mu.size();
  const Field omega = options.weight.size() ? options.weight : Field::Ones(n);
  const Field nu = omega.cwiseProduct(mu);
  const auto R = static_cast<Eigen::Index>(std::max<std::size_t>(1, options.restarts));
  auto gen = substream(options.seed, "mixed-norm-linear");
  Block X = normalize_columns(normal_block(gen, n, R), nu, p);

  MixedNormResult res;
  res.per_restart.assign(R, 0.0);
  std::vector<double> prev(R, -1.0);
  Block bestX = X;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    Block Y = A.forward(X);
    Eigen::RowVectorXd num = column_norms(Y, nu, r), den = column_norms(X, nu, p);
    double change = 0.0;
    for (Eigen::Index c = 0; c < R; ++c) {
      const double est = den[c] > 0.0 ? num[c] / den[c] : 0.0;
      if (est > res.per_restart[c]) res.per_restart[c] = est, bestX.col(c) = X.col(c);
      change = std::max(change, std::abs(est - prev[c]) / std::max(est, 1e-300));
      prev[c] = est;
    }
    res.iterations = it + 1;
    if (it > 0 && change < options.tolerance) {
      res.converged = true;
      break;
    }
    Block Z = omega.asDiagonal() * output_dual(Y, r);
    Block W = omega.cwiseInverse().asDiagonal() * A.adjoint(Z);
    Block Xn = dual_direction(W, nu, p);
    for (Eigen::Index c = 0; c < R; ++c)
      if (Xn.col(c).isZero(0.0)) Xn.col(c) = X.col(c);
    X = std::move(Xn);
  }
  res.best_restart = static_cast<std::size_t>(std::max_element(res.per_restart.begin(), res.per_restart.end()) -
                                              res.per_restart.begin());
  res.estimate = res.per_restart[res.best_restart];
  res.arg_h = bestX.col(static_cast<Eigen::Index>(res.best_restart));
  return res;
}

MixedNormResult mixed_norm_estimate(const BilinearAction& B, const Field& mu, double p, double q, double r,
                                    const MixedNormOptions& options) {
  check_exponent(p, "p");
  check_exponent(q, "q");
  if (!(r > 0.5) || std::isinf(r)) throw InvalidArgument("mixed_norm_estimate: r must be in (1/2, inf)");
  const Eigen::Index n = mu.size();
  const Field omega = options.weight.size() ? options.weight : Field::Ones(n);
  const Field nu = omega.cwiseProduct(mu);
  const Field inv_omega = omega.cwiseInverse();
  const auto R = static_cast<Eigen::Index>(std::max<std::size_t>(1, options.restarts));
  auto gen = substream(options.seed, "mixed-norm-bilinear");
  Block H = normalize_columns(normal_block(gen, n, R), nu, p);
  Block F = normalize_columns(normal_block(gen, n, R), nu, q);

  MixedNormResult res;
  res.per_restart.assign(R, 0.0);
  Block bestH = H, bestF = F;
  std::vector<double> prev;

  auto record = [&](const Block& Y) {
    Eigen::RowVectorXd num = column_norms(Y, nu, r), nh = column_norms(H, nu, p), nf = column_norms(F, nu, q);
    std::vector<double> est(R);
    for (Eigen::Index c = 0; c < R; ++c) {
      est[c] = nh[c] > 0.0 && nf[c] > 0.0 ? num[c] / (nh[c] * nf[c]) : 0.0;
      if (est[c] > res.per_restart[c]) {
        res.per_restart[c] = est[c];
        bestH.col(c) = H.col(c);
        bestF.col(c) = F.col(c);
      }
    }
    return est;
  };
  auto keep_nonzero = [&](Block next, const Block& current) {
    for (Eigen::Index c = 0; c < R; ++c)
      if (next.col(c).isZero(0.0)) next.col(c) = current.col(c);
    return next;
  };

  Block Y = B.forward(H, F);
  prev = record(Y);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    Block Z = omega.asDiagonal() * output_dual(Y, r);
    F = keep_nonzero(dual_direction(inv_omega.asDiagonal() * B.adjoint_f(H, Z), nu, q), F);
    Y = B.forward(H, F);
    record(Y);

    Z = omega.asDiagonal() * output_dual(Y, r);
    H = keep_nonzero(dual_direction(inv_omega.asDiagonal() * B.adjoint_h(F, Z), nu, p), H);
    Y = B.forward(H, F);
    std::vector<double> est = record(Y);

    double change = 0.0;
    for (Eigen::Index c = 0; c < R; ++c) {
      change = std::max(change, std::abs(est[c] - prev[c]) / std::max(est[c], 1e-300));
      prev[c] = est[c];
    }
    res.iterations = it + 1;
    if (change < options.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.best_restart = static_cast<std::size_t>(std::max_element(res.per_restart.begin(), res.per_restart.end()) -
                                              res.per_restart.begin());
  res.estimate = res.per_restart[res.best_restart];
  res.arg_h = bestH.col(static_cast<Eigen::Index>(res.best_restart));
  res.arg_f = bestF.col(static_cast<Eigen::Index>(res.best_restart));
  return res;
}

}  // namespace sgcalc
