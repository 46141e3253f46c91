#include "doctest.h"
#include "gen.hpp"

#include "sgcalc/bmo.hpp"

#include <cmath>

using namespace sgcalc;

namespace {

struct Fixture {
  SpacePtr space;
  GeneratorPtr gen;
  Calculus calc;
  ScaleGrid grid;
  explicit Fixture(SpacePtr s)
      : space(s), gen(assemble_generator(s)), calc(gen), grid(ScaleGrid::for_generator(*gen)) {}
};

double ball_avg(const Space& s, Vertex c, double r, const Field& v) {
  double acc = 0.0;
  for (Vertex y : s.ball_members(c, r)) acc += v[y] * s.measure()[y];
  return acc / s.ball_mass(c, r);
}

// Brute-force oracle: loop over every scale and ball.
double bmo_brute(const Fixture& fx, const Field& f) {
  double best = 0.0;
  for (double t : fx.grid.t()) {
    const Field osc = (f - semigroup(fx.calc, t, f, ActionPath::Dense)).cwiseAbs();
    for (Vertex x = 0; x < static_cast<Vertex>(fx.space->size()); ++x)
      best = std::max(best, ball_avg(*fx.space, x, std::sqrt(t), osc));
  }
  return best;
}

double carleson_brute(const Fixture& fx, const Field& f, int k) {
  std::vector<Field> sq;
  for (double t : fx.grid.t()) sq.push_back(apply_function(fx.calc, fn::carleson(k), t, f, ActionPath::Dense).array().square());
  double best = 0.0;
  for (std::size_t i = 0; i < fx.grid.size(); ++i) {
    const double r = std::sqrt(fx.grid.t_at(i));
    for (Vertex x = 0; x < static_cast<Vertex>(fx.space->size()); ++x) {
      double box = 0.0;
      for (std::size_t j = 0; j < fx.grid.size(); ++j)
        if (j <= i) box += (j == i ? 0.5 : 1.0) * fx.grid.weight(j) * ball_avg(*fx.space, x, r, sq[j]);
      best = std::max(best, box);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("BMO norms of constants vanish") {
  Fixture fx(grid2d(6, 5));
  CHECK(bmo_l_norm(fx.calc, Field::Constant(30, 7.0), fx.grid).norm == 0.0);
  CHECK(bmo_classical_norm(*fx.space, Field::Constant(30, 7.0)) == 0.0);
  CHECK(carleson_norm(fx.calc, Field::Constant(30, 7.0), 1, fx.grid).norm == 0.0);
}

TEST_CASE("two-point semigroup BMO follows the closed form") {
  Fixture fx(path_graph(2));
  Field f(2);
  f << 1, 0;
  double expected = 0.0;
  for (double t : fx.grid.t()) expected = std::max(expected, (1 - std::exp(-2 * t)) / 2);
  BmoReport r = bmo_l_norm(fx.calc, f, fx.grid);
  CHECK(r.norm == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r.per_scale.size() == fx.grid.size());
  CHECK(r.per_scale.back().saturated);
}

TEST_CASE("classical BMO of a half indicator on two points") {
  auto s = path_graph(2);
  Field f(2);
  f << 1, 0;
  CHECK(bmo_classical_norm(*s, f) == doctest::Approx(0.5));
}

TEST_CASE("semigroup and Carleson norms match brute-force enumeration") {
  std::mt19937_64 g(51);
  for (int trial = 0; trial < 5; ++trial) {
    Fixture fx(gen::any_graph(g, 25));
    const Field f = gen::field(g, fx.space->size());
    CHECK(bmo_l_norm(fx.calc, f, fx.grid).norm == doctest::Approx(bmo_brute(fx, f)).epsilon(1e-10));
    for (int k : {1, 2})
      CHECK(carleson_norm(fx.calc, f, k, fx.grid).norm == doctest::Approx(carleson_brute(fx, f, k)).epsilon(1e-10));
  }
}

TEST_CASE("property: BMO is a seminorm, shift invariant and dominated by the mean decomposition") {
  std::mt19937_64 g(52);
  for (int trial = 0; trial < 10; ++trial) {
    Fixture fx(gen::any_graph(g, 40));
    const std::size_t n = fx.space->size();
    const Field f = gen::field(g, n), h = gen::field(g, n);
    const double c = gen::uniform(g, -4.0, 4.0);
    const double nf = bmo_l_norm(fx.calc, f, fx.grid).norm;
    const double nh = bmo_l_norm(fx.calc, h, fx.grid).norm;
    CHECK(bmo_l_norm(fx.calc, c * f, fx.grid).norm == doctest::Approx(std::abs(c) * nf).epsilon(1e-10));
    CHECK(bmo_l_norm(fx.calc, f + h, fx.grid).norm <= nf + nh + 1e-10);
    CHECK(bmo_l_norm(fx.calc, f.array() + c, fx.grid).norm == doctest::Approx(nf).epsilon(1e-10));
    CHECK(nf > 0.0);

    // avg|f - e^-tL f| <= avg|f - f_Q| + avg|f_Q - e^-tL f| on every ball and scale
    double bound = 0.0;
    for (double t : fx.grid.t()) {
      const Field heat = semigroup(fx.calc, t, f);
      for (Vertex x = 0; x < static_cast<Vertex>(n); ++x) {
        const double r = std::sqrt(t);
        const double mean = ball_avg(*fx.space, x, r, f);
        bound = std::max(bound, ball_avg(*fx.space, x, r, (f.array() - mean).abs().matrix()) +
                                    ball_avg(*fx.space, x, r, (heat.array() - mean).abs().matrix()));
      }
    }
    CHECK(nf <= bound + 1e-12);
    CHECK(nf <= 2 * bound);
  }
}

TEST_CASE("property: Carleson norm is quadratic and stable under grid refinement") {
  std::mt19937_64 g(53);
  for (int trial = 0; trial < 6; ++trial) {
    Fixture fx(gen::any_graph(g, 40));
    const Field f = gen::field(g, fx.space->size());
    for (int k : {1, 2}) {
      const double base = carleson_norm(fx.calc, f, k, fx.grid).norm;
      CHECK(carleson_norm(fx.calc, 3.0 * f, k, fx.grid).norm == doctest::Approx(9.0 * base).epsilon(1e-10));
      const double fine = carleson_norm(fx.calc, f, k, fx.grid.refined()).norm;
      CHECK(base <= fine * (1 + 1e-3));
    }
  }
}

TEST_CASE("membership norm") {
  auto s = grid2d(5, 5);
  CHECK(m_membership_norm(*s, Field::Zero(25), 12, 0.5, 2.0) == 0.0);
  Field delta = Field::Zero(25);
  delta[12] = 1.0 / s->measure()[12];
  CHECK(m_membership_norm(*s, delta, 12, 0.5, 2.0) == doctest::Approx(1.0 / s->ball_mass(12, 1.0)));
}

TEST_CASE("property: sharp maximal function") {
  std::mt19937_64 g(54);
  for (int trial = 0; trial < 8; ++trial) {
    Fixture fx(gen::any_graph(g, 40));
    const std::size_t n = fx.space->size();
    const SpectralFunction psi = fn::psi(2);
    const Field h = gen::field(g, n);
    CHECK(sharp_maximal(fx.calc, Field(Field::Constant(static_cast<Eigen::Index>(n), 2.0)), 2.0, fx.grid, psi).cwiseAbs().maxCoeff() ==
          0.0);
    const double c = gen::uniform(g, -3.0, 3.0);
    const Field m2 = sharp_maximal(fx.calc, h, 2.0, fx.grid, psi);
    CHECK(gen::rel_diff(sharp_maximal(fx.calc, Field(c * h), 2.0, fx.grid, psi), std::abs(c) * m2) < 1e-12);
    const Field m1 = sharp_maximal(fx.calc, h, 1.0, fx.grid, psi);
    const Field m4 = sharp_maximal(fx.calc, h, 4.0, fx.grid, psi);
    CHECK((m1.array() <= m2.array() * (1 + 1e-12)).all());
    CHECK((m2.array() <= m4.array() * (1 + 1e-12)).all());
  }
}
