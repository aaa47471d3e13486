#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "excision/errors.hpp"
#include "excision/symflow.hpp"
#include "oracles.hpp"

using namespace excision;

namespace {

// F = (x^2 + y^2) / 2: rotation by -t in the (x, y) plane.
class Oscillator : public HamiltonianField {
 public:
  std::size_t dim() const override { return 2; }
  double chart_lo() const override { return -10.0; }
  double chart_hi() const override { return 10.0; }
  double value(std::span<const double> z) const override {
    return 0.5 * (z[0] * z[0] + z[1] * z[1]);
  }
  double value_and_gradient(std::span<const double> z, std::span<double> g) const override {
    g[0] = z[0];
    g[1] = z[1];
    return value(z);
  }
};

// F = -y: unit speed in x, straight into the chart end.
class Drift : public HamiltonianField {
 public:
  std::size_t dim() const override { return 2; }
  double chart_lo() const override { return -1.0; }
  double chart_hi() const override { return 1.0; }
  double value(std::span<const double> z) const override { return z[1]; }
  double value_and_gradient(std::span<const double> z, std::span<double> g) const override {
    g[0] = 0.0;
    g[1] = 1.0;
    return z[1];
  }
};

Point ray_point(int i) {
  const auto s = oracle::halton(i, 4);
  return {-0.15 + 0.3 * s[0], -0.15 + 0.3 * s[1], -0.6 + 1.5 * s[2], -0.3 + 0.6 * s[3]};
}

}  // namespace

TEST_CASE("fixed points stay put") {
  const auto F = build_ray_hamiltonian_n1();
  const Point z{-0.8, 0.1};
  const auto o = integrate(*F, z, 1.0);
  CHECK(o.status == FlowStatus::Completed);
  CHECK(o.endpoint == z);
  CHECK(o.step_count == 0);
}

TEST_CASE("oscillator against the exact rotation") {
  Oscillator F;
  const Point z{0.3, -0.7};
  for (double t : {0.5, 1.0, 2.0, -1.3}) {
    const auto o = integrate(F, z, t);
    CHECK(o.status == FlowStatus::Completed);
    CHECK(o.elapsed == t);
    CHECK(o.endpoint[0] == doctest::Approx(z[0] * std::cos(t) + z[1] * std::sin(t)).epsilon(1e-9));
    CHECK(o.endpoint[1] == doctest::Approx(-z[0] * std::sin(t) + z[1] * std::cos(t)).epsilon(1e-9));
    CHECK(o.energy_drift < 1e-9);
  }
  // Semigroup.
  const auto a = integrate(F, integrate(F, z, 0.4).endpoint, 0.9);
  const auto b = integrate(F, z, 1.3);
  CHECK(std::abs(a.endpoint[0] - b.endpoint[0]) < 1e-9);
  CHECK(std::abs(a.endpoint[1] - b.endpoint[1]) < 1e-9);
}

TEST_CASE("escape bracketing") {
  Drift F;
  const auto o = integrate(F, Point{0.2, 0.0}, 2.0);
  CHECK(o.status == FlowStatus::EscapedChart);
  CHECK(o.t_esc_lower <= o.t_esc_upper);
  CHECK(o.t_esc_upper - o.t_esc_lower <= 1e-4);
  CHECK(o.t_esc_lower == doctest::Approx(0.8 - 1e-6).epsilon(1e-9));
  CHECK(o.endpoint[0] < 1.0 - 1e-6);
  const auto back = integrate(F, Point{0.2, 0.0}, -2.0);
  CHECK(back.status == FlowStatus::EscapedChart);
  CHECK(back.t_esc_lower == doctest::Approx(-(1.2 - 1e-6)).epsilon(1e-9));
  CHECK_THROWS_AS(integrate(F, Point{1.5, 0.0}, 1.0), InputError);
}

TEST_CASE("ray in the plane") {
  const auto F = build_ray_hamiltonian_n1();
  const auto o = integrate(*F, Point{0.0, 0.0}, 1.0);
  CHECK(o.status == FlowStatus::EscapedChart);
  CHECK(o.t_esc_lower <= 1.0);
  CHECK(o.t_esc_upper >= 1.0 - 1e-6 - 1e-4);
  CHECK(escaped_by_one(o));
  const auto s = integrate(*F, Point{-0.2, 0.0}, 1.0);
  CHECK(s.status == FlowStatus::Completed);
  CHECK(s.endpoint[0] == doctest::Approx(0.8).epsilon(1e-9));
  CHECK_THROWS_AS(time1_map(*F, Point{0.1, 0.0}), ExcisedPointError);
}

TEST_CASE("time-1 maps: round trips and totality of the inverse") {
  const auto F = build_ray_hamiltonian(2);
  double fwd_back = 0.0, back_fwd = 0.0;
  int survivors = 0;
  for (int i = 0; survivors < 200; ++i) {
    const Point z = ray_point(i);
    const auto pre = integrate(*F, z, -1.0);
    REQUIRE(pre.status == FlowStatus::Completed);
    const Point again = time1_map(*F, pre.endpoint);
    for (int j = 0; j < 4; ++j) back_fwd = std::max(back_fwd, std::abs(again[j] - z[j]));
    const auto o = integrate(*F, z, 1.0);
    if (o.status != FlowStatus::Completed) continue;
    ++survivors;
    const Point back = inverse_time1_map(*F, o.endpoint);
    for (int j = 0; j < 4; ++j) fwd_back = std::max(fwd_back, std::abs(back[j] - z[j]));
  }
  CHECK(fwd_back < 1e-7);
  CHECK(back_fwd < 1e-7);
}

TEST_CASE("ensemble agrees with single trajectories") {
  const auto F = build_ray_hamiltonian(2);
  std::vector<Point> pts;
  for (int i = 0; i < 5; ++i) pts.push_back(ray_point(i + 40));
  const auto outs = integrate_ensemble(*F, pts, 0.7);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto o = integrate(*F, pts[k], 0.7);
    REQUIRE(o.status == outs[k].status);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(o.endpoint[j] - outs[k].endpoint[j]) < 1e-8);
  }
}

TEST_CASE("symplecticity residuals") {
  const BatchMap identity = pointwise([](const Point& p) { return p; });
  CHECK(symplecticity_residual(numerical_jacobian(identity, Point{0.1, 0.2, 0.3, 0.4})) < 1e-12);

  const auto g = make_reparam_g();
  const BatchMap lift = pointwise([&g](const Point& p) {
    const auto [a, b] = cotangent_lift(g, p[0], p[1]);
    return Point{a, b};
  });
  CHECK(check_symplectic(lift, Point{0.5, 1.0}).residual <= 1e-8);

  const BatchMap shear = pointwise([](const Point& p) { return Point{p[0] + p[1], p[1]}; });
  CHECK(check_symplectic(shear, Point{0.0, 0.0}).residual < 1e-9);
  const BatchMap stretch = pointwise([](const Point& p) { return Point{2 * p[0], p[1]}; });
  CHECK(check_symplectic(stretch, Point{0.0, 0.0}).residual == doctest::Approx(1.0));

  const auto F1 = build_ray_hamiltonian_n1();
  CHECK(check_symplectic(time1_batch(*F1, 1.0), Point{-0.3, 0.2}).residual <= 1e-5);

  const auto F2 = build_ray_hamiltonian(2);
  double worst = 0.0;
  int n = 0;
  for (int i = 0; n < 100; ++i) {
    const Point z = ray_point(i);
    if (integrate(*F2, z, 1.05).status != FlowStatus::Completed) continue;
    worst = std::max(worst, check_symplectic(time1_batch(*F2, 1.0), z).residual);
    ++n;
  }
  CHECK(worst <= 1e-5);
  // A stencil that reaches the ray cannot be differenced.
  CHECK_THROWS_AS(check_symplectic(time1_batch(*F1, 1.0), Point{0.0, 0.0}), StencilError);
}

TEST_CASE("escape classification on the ray") {
  const auto F = build_ray_hamiltonian(2);
  const std::vector<Point> grid{{0, 0, 0.5, 0}, {0.4, 0, 0.5, 0}, {0, 0, 0.5, 0.3},
                                {0, 0, -0.2, 0}, {0, 0, 0.0, 0}};
  auto in_Z = [](std::span<const double> z) {
    return z[0] == 0 && z[1] == 0 && z[3] == 0 && z[2] >= 0;
  };
  const auto rep = classify_escape(*F, in_Z, grid, {});
  CHECK(rep.checked == 5);
  CHECK(rep.excised == 2);
  CHECK(rep.mismatches.empty());
  CHECK(rep.max_energy_drift < 1e-7);
  CHECK(rep.outcomes[1].status == FlowStatus::Completed);
}

TEST_CASE("conservation over length-2 trajectories") {
  const auto F = build_ray_hamiltonian(2);
  double drift = 0.0;
  for (int i = 0; i < 100; ++i) {
    for (double t : {2.0, -2.0}) {
      const auto o = integrate(*F, ray_point(i), t);
      if (o.status == FlowStatus::Completed) drift = std::max(drift, o.energy_drift);
      if (t < 0) CHECK(o.status == FlowStatus::Completed);
    }
  }
  CHECK(drift <= 1e-7);
}

TEST_CASE("trajectory csv") {
  const auto F = build_ray_hamiltonian(2);
  std::vector<Point> rows;
  IntegratorOptions o;
  o.record = &rows;
  const auto out = integrate(*F, Point{0, 0, 0.5, 0}, 1.0, o);
  REQUIRE(rows.size() == out.step_count + 1);
  std::ostringstream os;
  write_trajectory_csv(os, rows);
  const std::string text = os.str();
  CHECK(text.rfind("t,x1,y1,x2,y2\n0,0,0,0.5,0\n", 0) == 0);
}
