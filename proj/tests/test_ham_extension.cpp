#include <cmath>
#include <vector>

#include "doctest.h"
#include "excision/errors.hpp"
#include "excision/ham_extension.hpp"
#include "oracles.hpp"

using namespace excision;

namespace {

// Central differences of F in every coordinate.
std::vector<double> fd_gradient(const HamiltonianField& F, std::vector<double> z,
                                double h = 1e-6) {
  std::vector<double> g(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double c = z[i];
    z[i] = c + h;
    const double up = F.value(z);
    z[i] = c - h;
    const double dn = F.value(z);
    z[i] = c;
    g[i] = (up - dn) / (2 * h);
  }
  return g;
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Gap relative to the size of the analytic gradient; the zero-locus factor
// makes some partials large, where differencing error grows with them.
double rel_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]) / (1.0 + std::abs(a[i])));
  }
  return m;
}

EpigraphSpec brush_spec() {
  ProductSet brush{{IntervalUnion::point(0.0), IntervalUnion::cantor(0.0, 1.0, 4)}};
  return {ClosedSetSpec(2, {brush}), SmoothFunction::constant(2, 0.0)};
}

ExcisionTarget brush_target() {
  ExcisionTarget Z;
  const ClosedSetSpec C = brush_spec().C;
  Z.contains = [C](std::span<const double> p, double x) { return C.contains(p) && x >= 0.0; };
  for (int i = 0; i < 2000; ++i) {
    const auto s = oracle::halton(i, 2);
    // Left endpoints of the depth-4 intervals lie in the set.
    const int k = static_cast<int>(s[0] * 16);
    double left = 0.0, scale = 1.0;
    for (int d = 3; d >= 0; --d) {
      scale /= 3.0;
      if ((k >> d) & 1) left += 2.0 * scale;
    }
    Z.samples.push_back({0.0, left, 0.999 * s[1]});
  }
  return Z;
}

}  // namespace

TEST_CASE("witness gradient") {
  const Witness w = model_witness(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto s = oracle::halton(i, 4);
    std::vector<double> z{-1 + 2 * s[0], -1 + 2 * s[1], 0.02 + 0.96 * s[2], -2 + 4 * s[3]};
    std::vector<double> g(4), scratch(4);
    const double v = w.eval(z, g);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    for (int j = 0; j < 4; ++j) {
      auto zp = z, zm = z;
      const double h = 1e-7;
      zp[j] += h;
      zm[j] -= h;
      const double fd = (w.eval(zp, scratch) - w.eval(zm, scratch)) / (2 * h);
      CHECK(std::abs(fd - g[j]) <= 1e-6 * (1 + std::abs(g[j])));
    }
  }
  // The witness decays towards both ends of the chart.
  std::vector<double> g(2);
  CHECK(w.eval(std::vector<double>{1e-6, 0.0}, g) < 1e-10);
  CHECK(w.eval(std::vector<double>{1 - 1e-6, 0.0}, g) < 1e-10);
}

TEST_CASE("ray Hamiltonian: gradient and vector field") {
  const auto F = build_ray_hamiltonian(2);
  CHECK(F->dim() == 4);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = oracle::halton(i, 4);
    std::vector<double> z{-0.4 + 0.8 * s[0], -0.4 + 0.8 * s[1], -0.6 + 1.55 * s[2],
                          -0.4 + 0.8 * s[3]};
    std::vector<double> g(4);
    F->value_and_gradient(z, g);
    worst = std::max(worst, max_gap(g, fd_gradient(*F, z)));
  }
  CHECK(worst < 1e-6);

  // Unit speed along the ray, frozen p and y on N.
  std::vector<double> X(4);
  for (double x : {-0.25, 0.0, 0.5, 0.99}) {
    F->vector_field(std::vector<double>{0, 0, x, 0}, X);
    CHECK(X[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(X[0] == 0.0);
    CHECK(X[1] == 0.0);
    CHECK(X[3] == 0.0);
  }
  F->vector_field(std::vector<double>{0, 0, -0.6, 0}, X);
  CHECK(X[2] == 0.0);
  // Off the axis on N the speed is damped by (1 - x^2) / (|p|^2 + 1 - x^2).
  F->vector_field(std::vector<double>{0.1, 0, 0.9, 0}, X);
  CHECK(X[2] == doctest::Approx(0.19 / 0.2 * F->cutoff(std::vector<double>{0.1, 0, 0.9, 0})));
}

TEST_CASE("ray Hamiltonian: flat cutoff and compact support") {
  const auto F = build_ray_hamiltonian(2);
  int zeros = 0;
  for (int i = 0; i < 4000; ++i) {
    const auto s = oracle::halton(i, 4);
    std::vector<double> z{-1 + 2 * s[0], -1 + 2 * s[1], -0.99 + 1.98 * s[2], -1 + 2 * s[3]};
    std::vector<double> g(4);
    const double v = F->value_and_gradient(z, g);
    const double x = z[2];
    const double r2 = z[0] * z[0] + z[1] * z[1] + z[3] * z[3];
    if (v == 0.0 && z[3] != 0.0) {
      ++zeros;
      CHECK(max_gap(g, {0, 0, 0, 0}) <= 1e-10);
    }
    // Support: x >= -eps and |p|^2 + y^2 <= h(x) / 2.
    if (x < -0.5 || r2 > 0.25 * (1 - x) / 2) CHECK(v == 0.0);
    CHECK(std::abs(v) <= std::abs(z[3]));
  }
  CHECK(zeros > 1000);
}

TEST_CASE("ray Hamiltonian in the plane") {
  const auto F = build_ray_hamiltonian_n1();
  CHECK(F->dim() == 2);
  std::vector<double> X(2);
  F->vector_field(std::vector<double>{0.3, 0.0}, X);
  CHECK(X[0] == 1.0);
  CHECK(X[1] == 0.0);
  for (int i = 0; i < 300; ++i) {
    const auto s = oracle::halton(i, 2);
    std::vector<double> z{-0.7 + 1.65 * s[0], -0.4 + 0.8 * s[1]};
    std::vector<double> g(2);
    F->value_and_gradient(z, g);
    CHECK(max_gap(g, fd_gradient(*F, z)) < 1e-6);
  }
  CHECK_THROWS_AS(build_ray_hamiltonian(1), InputError);
}

TEST_CASE("extension of an epigraph field") {
  const auto field = build_epigraph_field(brush_spec());
  const ExcisionTarget Z = brush_target();
  const auto F = extend_null_field(field, Z);
  CHECK(F->dim() == 4);
  CHECK(F->v_floor() == doctest::Approx(0.5));  // v = 1 - lambda = 1 on the target
  const Witness H1 = model_witness(-1.0, 1.0);

  double worst = 0.0;
  int zeros = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = oracle::halton(i, 4);
    std::vector<double> z{-0.3 + 0.6 * s[0], -0.2 + 1.4 * s[1], -0.9 + 1.85 * s[2],
                          -0.5 + 1.0 * s[3]};
    std::vector<double> g(4), gh(4);
    const double v = F->value_and_gradient(z, g);
    worst = std::max(worst, rel_gap(g, fd_gradient(*F, z, 1e-7)));
    CHECK(std::abs(v) <= 0.5 * H1.eval(z, gh) + 1e-15);
    if (v == 0.0) {
      ++zeros;
      CHECK(max_gap(g, {0, 0, 0, 0}) <= 1e-10);
    }
  }
  CHECK(worst < 1e-5);
  CHECK(zeros > 50);

  // On N: F vanishes, p stays put and X_F = v on the target.
  std::vector<double> X(4);
  for (const auto& s : std::vector<std::vector<double>>{{0, 0, 0.2}, {0, 2.0 / 3, 0.9}}) {
    std::vector<double> z{s[0], s[1], s[2], 0.0};
    CHECK(F->value(z) == 0.0);
    F->vector_field(z, X);
    CHECK(X[0] == 0.0);
    CHECK(X[1] == 0.0);
    CHECK(X[3] == 0.0);
    CHECK(X[2] == doctest::Approx(field->velocity(std::span<const double>(s).first(2), s[2])));
  }
  // Off C the fiber speed dies out before the end, so the cutoff switches off.
  F->vector_field(std::vector<double>{0.2, 0.5, 0.999, 0.0}, X);
  CHECK(X[2] == 0.0);
}

TEST_CASE("extension certificate") {
  const EpigraphSpec slow{ClosedSetSpec::point({0.0, 0.0}), SmoothFunction::constant(2, 0.9995)};
  ExcisionTarget Z;
  Z.contains = [](std::span<const double> p, double x) {
    return p[0] == 0 && p[1] == 0 && x >= 0.9995;
  };
  Z.samples = {{0.0, 0.0, 0.9996}, {0.0, 0.0, 0.9999}};
  CHECK_THROWS_AS(extend_null_field(build_epigraph_field(slow), Z), InputError);
  Z.samples = {{0.0, 0.0}};
  CHECK_THROWS_AS(extend_null_field(build_epigraph_field(brush_spec()), Z), InputError);
}

TEST_CASE("localization") {
  const auto F = build_ray_hamiltonian(2);
  ExcisionTarget Z;
  Z.contains = [](std::span<const double> p, double x) {
    return p[0] == 0 && p[1] == 0 && x >= 0;
  };
  for (int i = 0; i < 100; ++i) Z.samples.push_back({0.0, 0.0, i / 100.0});
  const double inf = kInf;
  NeighbourhoodSpec U{{-0.02, -0.02, -0.1, -0.02},
                      {0.02, 0.02, inf, 0.02},
                      {-0.04, -0.04, -0.2, -0.04},
                      {0.04, 0.04, inf, 0.04}};
  const auto L = localize(F, U, Z);
  std::vector<double> g(4), gi(4);
  for (int i = 0; i < 500; ++i) {
    const auto s = oracle::halton(i, 4);
    std::vector<double> z{-0.06 + 0.12 * s[0], -0.06 + 0.12 * s[1], -0.5 + 1.45 * s[2],
                          -0.06 + 0.12 * s[3]};
    const double v = L->value_and_gradient(z, g);
    if (U.outside(z)) {
      CHECK(v == 0.0);
      CHECK(max_gap(g, {0, 0, 0, 0}) == 0.0);
    } else if (U.in_inner(z)) {
      CHECK(v == F->value_and_gradient(z, gi));
      CHECK(max_gap(g, gi) == 0.0);
    }
    CHECK(max_gap(g, fd_gradient(*L, z)) < 1e-5);
  }
  NeighbourhoodSpec tight = U;
  tight.inner_lo[2] = 0.5;
  tight.outer_lo[2] = 0.4;
  CHECK_THROWS_AS(localize(F, tight, Z), InputError);
}
