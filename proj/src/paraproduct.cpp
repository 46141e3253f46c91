#include "sgcalc/paraproduct.hpp"

#include "sgcalc/error.hpp"

#include <cmath>

namespace sgcalc {

CalculusPair CalculusPair::with_order(int N) {
  if (N < 1) throw InvalidArgument("psi order N must be >= 1");
  return {N, fn::psi(N), fn::exp_neg(), fn::alt_phi()};
}

CalculusPair CalculusPair::for_dimension(double d_hom, double m) {
  if (!(d_hom >= 0.0) || !(m > 0.0)) throw InvalidArgument("CalculusPair: need d_hom >= 0 and m > 0");
  return with_order(static_cast<int>(std::ceil(d_hom / m - 1e-12)) + 1);
}

Block scale_sum(const Calculus& calc, const ScaleGrid& grid, const SpectralFunction& outer,
                const SpectralFunction& inner1, const Block& A, const SpectralFunction& inner2, const Block& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw InvalidArgument("scale_sum: block shapes differ");
  const Generator& gen = calc.generator();
  const Field& mu = calc.measure();
  const bool dense = gen.dense_available();
  const PreparedInput pa = calc.prepare(A, dense);
  const PreparedInput pb = calc.prepare(B, dense);

  Block out = Block::Zero(A.rows(), A.cols());
  // Scales resolved on the dense path accumulate modal coefficients and are
  // mapped back to vertices once at the end.
  Block modal_acc;
  Eigen::RowVectorXd mean_acc = Eigen::RowVectorXd::Zero(A.cols());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid.t_at(j), w = grid.weight(j);
    Block P = calc.apply(inner1, t, pa).cwiseProduct(calc.apply(inner2, t, pb));
    if (dense && calc.choose_path(outer, t, P.cols(), true) == ActionPath::Dense) {
      const Eigensystem& eig = gen.eigensystem();
      if (modal_acc.size() == 0) modal_acc = Block::Zero(eig.values.size(), A.cols());
      const Eigen::RowVectorXd mean = (mu.transpose() * P) / mu.sum();
      mean_acc += w * outer.at_zero * mean;
      auto [lo, hi] = calc.active_modes(outer, t);
      if (lo > hi) continue;
      const Eigen::Index a = hi - lo + 1;
      Eigen::VectorXd scale(a);
      for (Eigen::Index i = 0; i < a; ++i) scale[i] = w * outer(t * eig.values[lo + i]);
      Block centered = P.rowwise() - mean;
      modal_acc.middleRows(lo, a).noalias() +=
          scale.asDiagonal() * (eig.vectors.middleCols(lo, a).transpose() * (mu.asDiagonal() * centered));
    } else {
      out += w * calc.apply(outer, t, P, ActionPath::Chebyshev);
    }
  }
  if (modal_acc.size() != 0) out.noalias() += gen.eigensystem().vectors * modal_acc;
  out.rowwise() += mean_acc;
  return out;
}

namespace {

TrilinearResult trilinear(const Calculus& calc, const ScaleGrid& grid, const SpectralFunction& o1, const Field& a,
                          const SpectralFunction& o2, const Field& b, const SpectralFunction& o3, const Field& c) {
  const Field& mu = calc.measure();
  const bool dense = calc.generator().dense_available();
  Block abc(a.size(), 3);
  abc << a, b, c;
  // Inputs are prepared once; each slot applies its own function.
  const PreparedInput in = calc.prepare(abc, dense);
  auto column = [&](const PreparedInput& p, Eigen::Index col) {
    PreparedInput q;
    q.mean = p.mean.segment(col, 1);
    q.centered = p.centered.col(col);
    if (p.modal) q.modal = p.modal->col(col);
    return q;
  };
  const PreparedInput pa = column(in, 0), pb = column(in, 1), pc = column(in, 2);
  TrilinearResult res;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid.t_at(j);
    Field x = calc.apply(o1, t, pa).col(0);
    Field y = calc.apply(o2, t, pb).col(0);
    Field z = calc.apply(o3, t, pc).col(0);
    const double v = grid.weight(j) * (x.array() * y.array() * z.array() * mu.array()).sum();
    res.per_scale.push_back(v);
    res.value += v;
  }
  double coarse = 0.0;
  for (std::size_t j = 0; j < res.per_scale.size(); j += 2) coarse += 2.0 * res.per_scale[j];
  res.quadrature_error_estimate = std::abs(res.value - coarse);
  return res;
}

}  // namespace

TrilinearResult lambda1(const Calculus& calc, const CalculusPair& cp, const Field& b, const Field& f, const Field& g,
                        const ScaleGrid& grid) {
  return trilinear(calc, grid, cp.psi, g, cp.phi, b, cp.psi, f);
}

TrilinearResult lambda2(const Calculus& calc, const CalculusPair& cp, const Field& b, const Field& f, const Field& g,
                        const ScaleGrid& grid) {
  return trilinear(calc, grid, cp.psi, g, cp.phi, f, cp.psi, b);
}

TrilinearResult lambda_sym(const Calculus& calc, const CalculusPair& cp, const Field& h, const Field& f,
                           const Field& g, const ScaleGrid& grid) {
  return trilinear(calc, grid, cp.psi, g, cp.phi, f, cp.psi, h);
}

TrilinearResult lambda_pi1(const Calculus& calc, const CalculusPair& cp, const Field& h, const Field& f,
                           const Field& g, const ScaleGrid& grid) {
  return trilinear(calc, grid, cp.psi, g, cp.phi, f, cp.phi, h);
}

TrilinearResult lambda_pi2(const Calculus& calc, const CalculusPair& cp, const Field& h, const Field& f,
                           const Field& g, const ScaleGrid& grid) {
  return trilinear(calc, grid, cp.phi, g, cp.psi, f, cp.phi, h);
}

Field paraproduct_u(const Calculus& calc, const CalculusPair& cp, const Field& b, const Field& f,
                    const ScaleGrid& grid) {
  return scale_sum(calc, grid, cp.psi, cp.phi, Block(b), cp.psi, Block(f)).col(0);
}

Block paraproduct_pi1(const Calculus& calc, const CalculusPair& cp, const Block& H, const Block& F,
                      const ScaleGrid& grid) {
  return scale_sum(calc, grid, cp.psi, cp.phi, F, cp.phi, H);
}

Field paraproduct_pi1(const Calculus& calc, const CalculusPair& cp, const Field& h, const Field& f,
                      const ScaleGrid& grid) {
  return paraproduct_pi1(calc, cp, Block(h), Block(f), grid).col(0);
}

Block paraproduct_pi2(const Calculus& calc, const CalculusPair& cp, const Block& H, const Block& F,
                      const ScaleGrid& grid) {
  return scale_sum(calc, grid, cp.phi, cp.psi, F, cp.phi, H);
}

Field paraproduct_pi2(const Calculus& calc, const CalculusPair& cp, const Field& h, const Field& f,
                      const ScaleGrid& grid) {
  return paraproduct_pi2(calc, cp, Block(h), Block(f), grid).col(0);
}

Block pi1_adjoint_f(const Calculus& calc, const CalculusPair& cp, const Block& H, const Block& G,
                    const ScaleGrid& grid) {
  return scale_sum(calc, grid, cp.phi, cp.phi, H, cp.psi, G);
}

Block pi1_adjoint_h(const Calculus& calc, const CalculusPair& cp, const Block& F, const Block& G,
                    const ScaleGrid& grid) {
  return scale_sum(calc, grid, cp.phi, cp.phi, F, cp.psi, G);
}

Block pi2_adjoint_f(const Calculus& calc, const CalculusPair& cp, const Block& H, const Block& G,
                    const ScaleGrid& grid) {
  return paraproduct_pi1(calc, cp, H, G, grid);
}

Block pi2_adjoint_h(const Calculus& calc, const CalculusPair& cp, const Block& F, const Block& G,
                    const ScaleGrid& grid) {
  return paraproduct_pi2(calc, cp, G, F, grid);
}

double reproducing_residual(const Calculus& calc, const Field& f, const ScaleGrid& grid) {
  const Field& mu = calc.measure();
  const Field centered = f.array() - constant_part(f, mu);
  const double denom = lp_norm(centered, 2.0, mu);
  if (!(denom > 1e-14 * std::max(1.0, lp_norm(f, 2.0, mu))))
    throw ZeroInput("reproducing_residual: f has no component orthogonal to constants");
  Field acc = Field::Zero(f.size());
  for_each_scale(calc, fn::psi(1), grid, Block(f),
                 [&](std::size_t j, const Block& G) { acc += grid.weight(j) * G.col(0); });
  return lp_norm(Field(kReproducingConstant * acc - centered), 2.0, mu) / denom;
}

ProductDecomposition product_decomposition(const Calculus& calc, const Field& f, const Field& g,
                                           const ScaleGrid& grid) {
  const Field& mu = calc.measure();
  const SpectralFunction psi1 = fn::psi(1), tilde = fn::alt_phi();
  ProductDecomposition out;
  out.part1 = scale_sum(calc, grid, psi1, tilde, Block(f), tilde, Block(g)).col(0);
  out.part2 = scale_sum(calc, grid, tilde, psi1, Block(f), tilde, Block(g)).col(0);
  out.part3 = scale_sum(calc, grid, tilde, tilde, Block(f), psi1, Block(g)).col(0);
  out.kernel_correction = Field::Constant(f.size(), constant_part(f, mu) * constant_part(g, mu));
  const double c3 = std::pow(kReproducingConstant, 3);
  const Field fg = f.cwiseProduct(g);
  const Field target = fg - out.kernel_correction;
  const double denom = lp_norm(fg, 2.0, mu);
  const Field diff = c3 * (out.part1 + out.part2 + out.part3) - target;
  out.residual_norm = denom > 0.0 ? lp_norm(diff, 2.0, mu) / denom : lp_norm(diff, 2.0, mu);
  return out;
}

}  // namespace sgcalc
