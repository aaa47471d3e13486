#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "excision/errors.hpp"
#include "excision/trees.hpp"
#include "oracles.hpp"

using namespace excision;

namespace {

IntegratorOptions tight() {
  IntegratorOptions o;
  o.tol = 1e-13;
  return o;
}

Point along(const TreeSpec& t, std::size_t edge, double u, double offset = 0.0) {
  const auto& a = t.nodes[t.edges[edge][0]];
  const auto& b = t.nodes[t.edges[edge][1]];
  const double dx = b[0] - a[0], dy = b[1] - a[1], L = std::hypot(dx, dy);
  return {a[0] + u * dx - offset * dy / L, a[1] + u * dy + offset * dx / L};
}

}  // namespace

TEST_CASE("tree validation") {
  TreeSpec t = ray_with_two_horns();
  CHECK_NOTHROW(t.validate());
  TreeSpec cyc = t;
  cyc.edges[2] = {{0, 1}};
  CHECK_THROWS_AS(cyc.validate(), InputError);
  TreeSpec few = t;
  few.edges.pop_back();
  CHECK_THROWS_AS(few.validate(), InputError);
  CHECK(t.contains({-0.5, 0.5}));
  CHECK_FALSE(t.contains({2.0, 0.0}));  // the root is not in M
  CHECK_FALSE(t.contains({0.5, 0.1}));
  CHECK_THROWS_AS(excise_tree(segment_retract()), InputError);
}

TEST_CASE("strip chart of a unit branch") {
  const StripChart c = strip_chart({0.0, 0.0}, {1.0, 0.0}, 0.05, std::numbers::pi / 2, 0.02);
  for (double u : {0.0, 0.25, 0.5, 0.999}) {
    const auto m = c.to_model({u, 0.0});
    REQUIRE(m);
    CHECK((*m)[0] == doctest::Approx(u / (2.0 - u)));
    CHECK((*m)[1] == 0.0);
  }
  CHECK_FALSE(c.to_model({1.0, 0.0}));
  CHECK_FALSE(c.to_model({1.5, 0.3}));

  for (int i = 0; i < 50; ++i) {
    const auto s = oracle::halton(i, 2);
    const Vec2 w{-0.03 + 1.0 * s[0], (-1.0 + 2.0 * s[1]) * 0.9 * c.width(1.0 - (-0.03 + s[0]))};
    const auto m = *c.to_model(w);
    const Vec2 back = c.to_ambient(m[0], m[1]);
    CHECK(std::abs(back[0] - w[0]) < 1e-13);
    CHECK(std::abs(back[1] - w[1]) < 1e-13);
    const double h = 1e-6;
    const Vec2 xp = c.to_ambient(m[0] + h, m[1]), xm = c.to_ambient(m[0] - h, m[1]);
    const Vec2 yp = c.to_ambient(m[0], m[1] + h), ym = c.to_ambient(m[0], m[1] - h);
    const double det = ((xp[0] - xm[0]) * (yp[1] - ym[1]) - (xp[1] - xm[1]) * (yp[0] - ym[0])) /
                       (4 * h * h);
    CHECK(std::abs(det - 1.0) < 1e-8);
  }

  // Rotation plus translation of a slanted branch is exactly area preserving.
  const StripChart r = strip_chart({-1.0, 1.0}, {0.0, 0.0}, 0.05, std::numbers::pi / 2, 0.02);
  const BatchMap rot = pointwise([&r](const Point& p) {
    const Vec2 w = r.to_ambient(0.0, 0.0);
    const Vec2 e = r.to_ambient(1.0 / 3.0, 0.0);  // s = L / 2
    const double L = std::hypot(e[0] - w[0], e[1] - w[1]);
    const double c0 = (e[0] - w[0]) / L, s0 = (e[1] - w[1]) / L;
    return Point{c0 * p[0] - s0 * p[1], s0 * p[0] + c0 * p[1]};
  });
  // Linear map: a wide plain step avoids rounding in the differences.
  CHECK(check_symplectic(rot, Point{0.3, -0.2}, 0.125, false).residual < 1e-12);
}

TEST_CASE("branch Hamiltonian lives in the envelope") {
  const StripChart c = strip_chart({0.0, 0.0}, {1.0, 0.0}, 0.05, std::numbers::pi / 4, 0.02);
  const auto F = build_ray_hamiltonian_n1(0.02, c.profile());
  int inside = 0;
  for (int i = 0; i < 4000; ++i) {
    const auto s = oracle::halton(i, 2);
    const Vec2 w{-0.1 + 1.2 * s[0], -0.08 + 0.16 * s[1]};
    const auto m = c.to_model(w);
    if (!m) continue;
    const double v = F->value(std::vector<double>{(*m)[0], (*m)[1]});
    if (v != 0.0) {
      ++inside;
      CHECK(c.in_envelope(w));
    }
  }
  CHECK(inside > 100);
  // Profile derivative.
  const auto h = c.profile();
  for (double x : {-0.01, 0.2, 0.7, 0.95}) {
    CHECK(h.deriv(x) == doctest::Approx(oracle::central_difference(h.eval, x, 1e-6)).epsilon(1e-6));
  }
}

TEST_CASE("ray with two horns") {
  const TreeSpec t = ray_with_two_horns();
  const StagedExcision S = excise_tree(t);
  REQUIRE(S.stages().size() == 3);
  CHECK(S.stages()[0].edge == 0);
  CHECK(S.stages()[1].edge == 1);
  CHECK(S.stages()[2].edge == 2);
  CHECK(S.components() == 1);

  // Points on a branch are removed in that branch's stage.
  for (std::size_t e = 0; e < 3; ++e) {
    for (double u : {0.0, 0.3, 0.6, 0.9}) {
      const Point w = along(t, e, u);
      const auto r = S.trace({w[0], w[1]}, false);
      REQUIRE(r.escaped);
      CHECK(S.stages()[*r.escaped].edge == e);
    }
  }
  CHECK_THROWS_AS(S.forward(along(t, 0, 0.5)), ExcisedPointError);

  // Identity outside U, bit for bit, both directions.
  int outside = 0;
  for (int i = 0; outside < 200; ++i) {
    const auto s = oracle::halton(i, 2);
    const Point w{-1.5 + 4.0 * s[0], -1.5 + 3.0 * s[1]};
    if (t.distance({w[0], w[1]}) < t.u_radius) continue;
    ++outside;
    CHECK(S.forward(w) == w);
    CHECK(S.inverse(w) == w);
  }

  // Near the tree: round trips and composed symplecticity.
  double worst = 0.0, round = 0.0;
  for (int i = 0; i < 30; ++i) {
    const auto s = oracle::halton(i, 3);
    const Point w = along(t, i % 3, 0.1 + 0.8 * s[0], (s[1] < 0.5 ? -1 : 1) * (0.004 + 0.03 * s[2]));
    const Point f = S.forward(w, tight());
    const Point b = S.inverse(f, tight());
    round = std::max(round, std::hypot(b[0] - w[0], b[1] - w[1]));
    const Point g = S.forward(S.inverse(w, tight()), tight());
    round = std::max(round, std::hypot(g[0] - w[0], g[1] - w[1]));
    worst = std::max(worst, check_symplectic(S.forward_batch(tight()), w).residual);
  }
  CHECK(round < 1e-7);
  CHECK(worst < 2e-5);
}

TEST_CASE("retraction of a segment") {
  const TreeSpec t = segment_retract();
  const StagedExcision S = retract_tree(t);
  CHECK(S.components() == 2);
  CHECK(S.stages().size() == 2);
  for (double x : {-0.9, -0.5, 0.4, 0.95}) {
    CHECK(S.trace({x, 0.0}, false).escaped.has_value());
  }
  // The retraction point itself is fixed; a nearby point off the tree
  // survives and does not land on z0.
  CHECK(S.forward(Point{0.0, 0.0}) == Point{0.0, 0.0});
  const Point w{0.5, 0.02};
  const Point f = S.forward(w, tight());
  CHECK(std::hypot(f[0], f[1]) > 0.0);
  CHECK(std::hypot(f[0] - w[0], f[1] - w[1]) > 1e-3);
}

TEST_CASE("overlapping strips are rejected") {
  TreeSpec t;
  t.nodes = {{0.0, 0.0}, {2.0, 0.0}, {2.0, 0.06}, {0.3, 0.06}};
  t.edges = {{{0, 1}}, {{1, 2}}, {{2, 3}}};
  t.root = 0;
  CHECK_THROWS_AS(excise_tree(t), InputError);
}
