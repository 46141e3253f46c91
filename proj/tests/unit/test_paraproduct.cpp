#include "doctest.h"
#include "gen.hpp"

#include "sgcalc/error.hpp"
#include "sgcalc/paraproduct.hpp"

#include <cmath>

using namespace sgcalc;

namespace {

struct Fixture {
  SpacePtr space;
  GeneratorPtr gen;
  Calculus calc;
  ScaleGrid grid;
  explicit Fixture(SpacePtr s, ScaleGridParams p = {})
      : space(s), gen(assemble_generator(s)), calc(gen), grid(ScaleGrid::for_generator(*gen, p)) {}
  Field eigenvector(Eigen::Index i) const { return gen->eigensystem().vectors.col(i); }
  const Field& mu() const { return space->measure(); }
};

const double kPsiSquared = 0.25 - 2.0 / 9.0 + 1.0 / 16.0;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("reproducing constant is 2") {
  CHECK(1.0 / integrate_du_over_u(fn::psi(1).eval) == doctest::Approx(kReproducingConstant).epsilon(1e-12));
}

TEST_CASE("order of the band-pass function") {
  CHECK(CalculusPair::for_dimension(2.0, 2.0).N == 2);
  CHECK(CalculusPair::for_dimension(2.3, 2.0).N == 3);
  CHECK(CalculusPair::for_dimension(1.0, 2.0).N == 2);
  CalculusPair cp = CalculusPair::with_order(1);
  CHECK(cp.psi(0.0) == 0.0);
  CHECK(cp.phi(0.0) == 1.0);
}

TEST_CASE("trilinear forms on an eigenvector match the analytic integral") {
  Fixture fx(grid2d(6, 6));
  CalculusPair cp = CalculusPair::with_order(1);
  const Field v = fx.eigenvector(4), one = Field::Ones(36);
  CHECK(rel(lambda1(fx.calc, cp, one, v, v, fx.grid).value, kPsiSquared) < 1e-4);
  CHECK(rel(lambda_sym(fx.calc, cp, v, one, v, fx.grid).value, kPsiSquared) < 1e-4);
}

TEST_CASE("Pi_1 with a constant symbol is a multiple of the identity on eigenvectors") {
  Fixture fx(grid2d(6, 6));
  for (int N : {1, 2, 3}) {
    CalculusPair cp = CalculusPair::with_order(N);
    const double c = std::tgamma(N) * (std::pow(2.0, -N) - std::pow(3.0, -N));
    const Field v = fx.eigenvector(5);
    const Field out = paraproduct_pi1(fx.calc, cp, Field(Field::Ones(36)), v, fx.grid);
    CHECK(gen::rel_diff(out, c * v) < 1e-4);
  }
}

TEST_CASE("annihilation and linear slots") {
  Fixture fx(grid2d(5, 5));
  CalculusPair cp = CalculusPair::with_order(2);
  std::mt19937_64 g(61);
  const Field b = gen::field(g, 25), f = gen::field(g, 25), h = gen::field(g, 25);
  const Field c = Field::Constant(25, 1.7);
  CHECK(lambda1(fx.calc, cp, b, c, f, fx.grid).value == 0.0);
  CHECK(lambda2(fx.calc, cp, c, b, f, fx.grid).value == 0.0);
  CHECK(lambda_sym(fx.calc, cp, c, b, f, fx.grid).value == 0.0);
  CHECK(lambda_sym(fx.calc, cp, b, f, c, fx.grid).value == 0.0);
  CHECK(paraproduct_pi1(fx.calc, cp, h, Field(Field::Zero(25)), fx.grid).cwiseAbs().maxCoeff() == 0.0);
  CHECK(paraproduct_pi2(fx.calc, cp, h, c, fx.grid).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lambda2(fx.calc, cp, b, f, h, fx.grid).value == lambda1(fx.calc, cp, f, b, h, fx.grid).value);
}

TEST_CASE("property: duality, adjoints and bilinearity") {
  std::mt19937_64 g(62);
  for (int trial = 0; trial < 6; ++trial) {
    Fixture fx(gen::any_graph(g, 40));
    const std::size_t n = fx.space->size();
    CalculusPair cp = CalculusPair::with_order(static_cast<int>(gen::pick(g, 1, 3)));
    const Field b = gen::field(g, n), f = gen::field(g, n), h = gen::field(g, n), k = gen::field(g, n);
    const double a = gen::uniform(g, -2.0, 2.0);
    const Field& mu = fx.mu();

    const double l1 = lambda1(fx.calc, cp, b, f, k, fx.grid).value;
    CHECK(std::abs(l1 - inner(paraproduct_u(fx.calc, cp, b, f, fx.grid), k, mu)) <= 1e-9 * std::max(1.0, std::abs(l1)));

    const Field p1 = paraproduct_pi1(fx.calc, cp, h, f, fx.grid);
    const Field p2 = paraproduct_pi2(fx.calc, cp, h, f, fx.grid);
    const double d1 = lambda_pi1(fx.calc, cp, h, f, k, fx.grid).value;
    const double d2 = lambda_pi2(fx.calc, cp, h, f, k, fx.grid).value;
    CHECK(std::abs(inner(p1, k, mu) - d1) <= 1e-9 * std::max(1.0, std::abs(d1)));
    CHECK(std::abs(inner(p2, k, mu) - d2) <= 1e-9 * std::max(1.0, std::abs(d2)));

    const Block H(h), F(f), K(k);
    const double scale = std::max(1.0, std::abs(d1));
    CHECK(std::abs(inner(f, pi1_adjoint_f(fx.calc, cp, H, K, fx.grid).col(0), mu) - d1) <= 1e-9 * scale);
    CHECK(std::abs(inner(h, pi1_adjoint_h(fx.calc, cp, F, K, fx.grid).col(0), mu) - d1) <= 1e-9 * scale);
    const double scale2 = std::max(1.0, std::abs(d2));
    CHECK(std::abs(inner(f, pi2_adjoint_f(fx.calc, cp, H, K, fx.grid).col(0), mu) - d2) <= 1e-9 * scale2);
    CHECK(std::abs(inner(h, pi2_adjoint_h(fx.calc, cp, F, K, fx.grid).col(0), mu) - d2) <= 1e-9 * scale2);

    CHECK(gen::rel_diff(paraproduct_pi1(fx.calc, cp, h, Field(a * f + b), fx.grid),
                        a * p1 + paraproduct_pi1(fx.calc, cp, h, b, fx.grid)) < 1e-10);
    CHECK(gen::rel_diff(paraproduct_pi2(fx.calc, cp, Field(a * h + b), f, fx.grid),
                        a * p2 + paraproduct_pi2(fx.calc, cp, b, f, fx.grid)) < 1e-10);
  }
}

TEST_CASE("property: scale integrals are stable under grid refinement") {
  std::mt19937_64 g(63);
  for (int trial = 0; trial < 4; ++trial) {
    Fixture fx(gen::any_graph(g, 40));
    const std::size_t n = fx.space->size();
    CalculusPair cp = CalculusPair::with_order(2);
    const Field b = gen::field(g, n), f = gen::field(g, n), h = gen::field(g, n);
    const ScaleGrid fine = fx.grid.refined();
    CHECK(gen::rel_diff(paraproduct_pi1(fx.calc, cp, h, f, fx.grid), paraproduct_pi1(fx.calc, cp, h, f, fine)) < 1e-3);
    CHECK(gen::rel_diff(paraproduct_pi2(fx.calc, cp, h, f, fx.grid), paraproduct_pi2(fx.calc, cp, h, f, fine)) < 1e-3);
    CHECK(rel(lambda1(fx.calc, cp, b, f, h, fx.grid).value, lambda1(fx.calc, cp, b, f, h, fine).value) < 1e-3);
  }
}

TEST_CASE("reproducing residual") {
  Fixture fx(path_graph(64));
  CHECK(reproducing_residual(fx.calc, fx.eigenvector(7), fx.grid) <= 1e-6);
  CHECK_THROWS_AS(reproducing_residual(fx.calc, Field::Constant(64, 2.0), fx.grid), ZeroInput);
}

TEST_CASE("product decomposition") {
  Fixture fx(path_graph(32));
  const Field c = Field::Constant(32, 3.0);
  ProductDecomposition flat = product_decomposition(fx.calc, c, c, fx.grid);
  CHECK(flat.part1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(flat.part2.cwiseAbs().maxCoeff() == 0.0);
  CHECK(flat.part3.cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 g(64);
  const Field f = gen::mean_zero(gen::field(g, 32), fx.mu()), h = gen::mean_zero(gen::field(g, 32), fx.mu());
  ProductDecomposition base = product_decomposition(fx.calc, f, h, fx.grid);
  ProductDecomposition tripled = product_decomposition(fx.calc, 3.0 * f, h, fx.grid);
  CHECK(gen::rel_diff(tripled.part1, 3.0 * base.part1) < 1e-12);
  CHECK(gen::rel_diff(tripled.part2, 3.0 * base.part2) < 1e-12);
  CHECK(gen::rel_diff(tripled.part3, 3.0 * base.part3) < 1e-12);

  // residual halves at least with each quadrature refinement
  ScaleGridParams coarse;
  coarse.rho = 4.0;
  Fixture fc(path_graph(32), coarse);
  ScaleGrid grid = fc.grid;
  double prev = product_decomposition(fc.calc, f, h, grid).residual_norm;
  for (int step = 0; step < 2; ++step) {
    grid = grid.refined();
    const double next = product_decomposition(fc.calc, f, h, grid).residual_norm;
    CHECK(next <= prev / 2);
    prev = next;
  }
}
