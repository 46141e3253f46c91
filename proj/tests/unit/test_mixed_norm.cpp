#include "doctest.h"
#include "gen.hpp"

#include "sgcalc/calculus.hpp"
#include "sgcalc/error.hpp"
#include "sgcalc/mixed_norm.hpp"

#include <cmath>
#include <numbers>

using namespace sgcalc;

namespace {

LinearAction matrix_action(const Eigen::MatrixXd& A) {
  return {[A](const Block& F) -> Block { return A * F; }, [A](const Block& G) -> Block { return A.transpose() * G; }};
}

BilinearAction pointwise_product() {
  return {[](const Block& H, const Block& F) -> Block { return H.cwiseProduct(F); },
          [](const Block& H, const Block& G) -> Block { return H.cwiseProduct(G); },
          [](const Block& F, const Block& G) -> Block { return F.cwiseProduct(G); }};
}

}  // namespace

TEST_CASE("diagonal map has norm 3 on L2") {
  Eigen::Matrix2d A;
  A << 3, 0, 0, 1;
  MixedNormResult r = mixed_norm_estimate(matrix_action(A), Field::Ones(2), 2.0, 2.0);
  CHECK(r.estimate == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(r.converged);
}

TEST_CASE("heat semigroup has L2 norm 1") {
  auto gen = assemble_generator(grid2d(5, 5));
  Calculus calc(gen);
  LinearAction heat{[&](const Block& F) -> Block { return calc.apply(fn::exp_neg(), 0.7, F); },
                    [&](const Block& G) -> Block { return calc.apply(fn::exp_neg(), 0.7, G); }};
  CHECK(mixed_norm_estimate(heat, gen->space().measure(), 2.0, 2.0).estimate == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("pointwise product on two points, L4 x L4 to L2") {
  // brute force over the parameter space: f = (cos a, sin a), h = (cos b, sin b) up to scaling
  double brute = 0.0;
  const int steps = 400;
  for (int i = 0; i < steps; ++i)
    for (int j = 0; j < steps; ++j) {
      const double a = std::numbers::pi * i / steps, b = std::numbers::pi * j / steps;
      const double f0 = std::cos(a), f1 = std::sin(a), h0 = std::cos(b), h1 = std::sin(b);
      const double num = std::sqrt(std::pow(f0 * h0, 2) + std::pow(f1 * h1, 2));
      const double den = std::pow(std::pow(f0, 4) + std::pow(f1, 4), 0.25) * std::pow(std::pow(h0, 4) + std::pow(h1, 4), 0.25);
      brute = std::max(brute, num / den);
    }
  CHECK(brute == doctest::Approx(1.0).epsilon(1e-12));
  MixedNormResult r = mixed_norm_estimate(pointwise_product(), Field::Ones(2), 4.0, 4.0, 2.0);
  CHECK(r.estimate == doctest::Approx(brute).epsilon(1e-6));
}

TEST_CASE("property: linear estimates are lower bounds close to the exact L2 norm") {
  std::mt19937_64 g(71);
  for (int trial = 0; trial < 10; ++trial) {
    const auto n = static_cast<Eigen::Index>(gen::pick(g, 3, 30));
    const Eigen::MatrixXd A = normal_block(g, n, n);
    const double exact = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()[0];
    MixedNormOptions opt;
    opt.seed = static_cast<std::uint64_t>(trial);
    opt.max_iterations = 500;
    const double est = mixed_norm_estimate(matrix_action(A), Field::Ones(n), 2.0, 2.0, opt).estimate;
    CHECK(est <= exact * (1 + 1e-10));
    CHECK(est >= exact * 0.99);
  }
}

TEST_CASE("property: bilinear estimates never exceed Hoelder bounds") {
  std::mt19937_64 g(72);
  for (int trial = 0; trial < 6; ++trial) {
    const auto n = static_cast<Eigen::Index>(gen::pick(g, 2, 12));
    const Field mu = gen::positive_field(g, static_cast<std::size_t>(n)).array() + 0.5;
    // ||f h||_r <= ||f||_p ||h||_q when 1/r = 1/p + 1/q
    const double p = 4.0, q = 4.0, r = 2.0;
    const double est = mixed_norm_estimate(pointwise_product(), mu, p, q, r).estimate;
    CHECK(est <= 1.0 + 1e-10);
    CHECK(est >= 0.99);
  }
}

TEST_CASE("deterministic given the seed") {
  std::mt19937_64 g(73);
  const Eigen::MatrixXd A = normal_block(g, 12, 12);
  MixedNormOptions opt;
  opt.seed = 5;
  MixedNormResult a = mixed_norm_estimate(matrix_action(A), Field::Ones(12), 3.0, 1.5, opt);
  MixedNormResult b = mixed_norm_estimate(matrix_action(A), Field::Ones(12), 3.0, 1.5, opt);
  CHECK(a.estimate == b.estimate);
  CHECK(a.per_restart == b.per_restart);
}

TEST_CASE("exponent validation") {
  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
  CHECK_THROWS_AS(mixed_norm_estimate(matrix_action(A), Field::Ones(2), 1.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(mixed_norm_estimate(pointwise_product(), Field::Ones(2), 2.0, 2.0, 0.4), InvalidArgument);
}

TEST_CASE("column norms") {
  Block X(2, 2);
  X << 1, -3, 2, 4;
  Field mu(2);
  mu << 1, 2;
  Eigen::RowVectorXd n2 = column_norms(X, mu, 2.0);
  CHECK(n2[0] == doctest::Approx(3.0));
  CHECK(n2[1] == doctest::Approx(std::sqrt(41.0)));
  CHECK(column_norms(X, mu, kInf)[1] == 4.0);
}
