#include "doctest.h"
#include "gen.hpp"

#include "sgcalc/error.hpp"
#include "sgcalc/space.hpp"

#include <sstream>

using namespace sgcalc;

TEST_CASE("two-point path has unit metric and total mass 2") {
  auto s = path_graph(2);
  CHECK(s->size() == 2);
  CHECK(s->distance(0, 1) == 1.0);
  CHECK(s->distance(1, 0) == 1.0);
  CHECK(s->distance(0, 0) == 0.0);
  CHECK(s->total_mass() == 2.0);
  CHECK(s->diameter() == 1.0);
}

TEST_CASE("unit triangle is equidistant") {
  auto s = build_space({{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}, Field::Ones(3));
  for (Vertex a = 0; a < 3; ++a)
    for (Vertex b = 0; b < 3; ++b) CHECK(s->distance(a, b) == (a == b ? 0.0 : 1.0));
}

TEST_CASE("opposite corners of the 4-cycle are at distance 2") {
  auto s = cycle_graph(4);
  CHECK(s->distance(0, 2) == 2.0);
  CHECK(s->distance(1, 3) == 2.0);
  CHECK(s->distance(0, 3) == 1.0);
}

TEST_CASE("weighted shortest paths prefer the lighter route") {
  auto s = build_space({{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 5.0}}, Field::Ones(3));
  CHECK(s->distance(0, 2) == 2.0);
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(build_space({{0, 1, 1.0}, {2, 3, 1.0}}, Field::Ones(4)), DisconnectedGraph);
  CHECK_THROWS_AS(build_space({{0, 1, 0.0}}, Field::Ones(2)), NonPositiveWeight);
  CHECK_THROWS_AS(build_space({{0, 1, 1.0}}, Field::Constant(2, -1.0)), NonPositiveWeight);
}

TEST_CASE("balls are distance prefixes") {
  auto s = path_graph(101);
  CHECK(s->ball_mass(50, 10.0) == 21.0);
  CHECK(s->ball_mass(50, 20.0) == 41.0);
  CHECK(s->ball_size(0, 10.0) == 11);
  Ball b = make_ball(*s, 50, 2.0);
  CHECK(b.members.size() == 5);
  CHECK(b.members.front() == 50);
  CHECK(b.mass == 5.0);
}

TEST_CASE("grid2d indexing and coordinates") {
  auto s = grid2d(3, 2);
  CHECK(s->size() == 6);
  CHECK(s->distance(0, 5) == 3.0);  // (0,0) to (2,1)
  REQUIRE(s->has_coordinates());
  CHECK(s->coordinates()[4][0] == 1.0);
  CHECK(s->coordinates()[4][1] == 1.0);
}

TEST_CASE("edge list round trip") {
  std::istringstream in("# a comment\n0 1 1.5\n1 2 0.5\n# measure 2 3\n\n");
  auto s = parse_edge_list(in);
  CHECK(s->size() == 3);
  CHECK(s->distance(0, 2) == doctest::Approx(2.0));
  CHECK(s->measure()[2] == 3.0);
  std::ostringstream out;
  write_edge_list(*s, out);
  std::istringstream back(out.str());
  auto t = parse_edge_list(back);
  CHECK(t->size() == 3);
  CHECK(t->distance(0, 2) == doctest::Approx(2.0));
  CHECK(t->measure()[2] == 3.0);
}

TEST_CASE("property: metric axioms and ball monotonicity on random graphs") {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 25; ++trial) {
    auto s = gen::any_graph(g, 40);
    CHECK(check_metric(*s).ok());
    const auto c = static_cast<Vertex>(gen::pick(g, 0, s->size() - 1));
    double prev = 0.0;
    for (double r : s->canonical_radii()) {
      Ball b = make_ball(*s, c, r);
      CHECK(b.mass >= prev);
      CHECK(b.members.front() == c);
      for (Vertex y : b.members) CHECK(s->distance(c, y) <= radius_with_slack(r));
      prev = b.mass;
    }
    CHECK(prev == doctest::Approx(s->total_mass()));
  }
}
