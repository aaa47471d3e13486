#include <cmath>

#include "lab_internal.hpp"

namespace excision::lab {

namespace {

// The ray R = {p = 0, y = 0, x >= 0}; U is a box about it, scaled by s.
NeighbourhoodSpec ray_neighbourhood(std::size_t dim, double s) {
  NeighbourhoodSpec U;
  U.inner_lo.assign(dim, -0.5 * s);
  U.inner_hi.assign(dim, 0.5 * s);
  U.outer_lo.assign(dim, -0.75 * s);
  U.outer_hi.assign(dim, 0.75 * s);
  U.inner_lo[dim - 2] = -0.6 * s;
  U.outer_lo[dim - 2] = -0.9 * s;
  U.inner_hi[dim - 2] = kInf;
  U.outer_hi[dim - 2] = kInf;
  return U;
}

double off_axis(std::span<const double> z) {
  double r2 = z.back() * z.back();
  for (std::size_t i = 0; i + 2 < z.size(); ++i) r2 += z[i] * z[i];
  return std::sqrt(r2);
}

}  // namespace

void run_ray(Context& ctx) {
  const std::size_t n = ctx.cfg.scenario == "ray-n1" ? 1 : ctx.cfg.dimension;
  const std::size_t dim = 2 * n;
  const std::size_t ix = dim - 2;
  const double s = ctx.cfg.u_scale;
  const double margin = ctx.cfg.margin;

  const HamiltonianPtr raw =
      n == 1 ? HamiltonianPtr(build_ray_hamiltonian_n1(ctx.cfg.eps))
             : HamiltonianPtr(build_ray_hamiltonian(n, ctx.cfg.eps));
  ExcisionTarget Z;
  Z.contains = [](std::span<const double> p, double x) {
    for (double v : p) {
      if (v != 0.0) return false;
    }
    return x >= 0.0;
  };
  for (int k = 0; k < 200; ++k) {
    std::vector<double> sample(dim - 1, 0.0);
    sample.back() = 0.999 * k / 200.0;
    Z.samples.push_back(sample);
  }
  const NeighbourhoodSpec U = ray_neighbourhood(dim, s);
  const auto F = localize(raw, U, Z);

  const auto in_Z = [ix](std::span<const double> z) {
    return off_axis(z) == 0.0 && z[ix] >= 0.0;
  };
  // Distance to Z below the margin; on the ray itself, near its end point.
  const auto in_margin = [ix, margin](std::span<const double> z) {
    const double d = off_axis(z);
    if (d == 0.0) return std::abs(z[ix]) < margin;
    return (z[ix] >= 0.0 ? d : std::hypot(d, z[ix])) < margin;
  };

  // g x g plane through the ray (y = 0 row included for odd g), plus as many
  // seeded points of which a quarter lie on N and a quarter on the axis.
  const std::size_t g = ctx.grid_or(71);
  std::vector<Point> grid;
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      Point z(dim, 0.0);
      z[ix] = -0.98 + 1.96 * i / (g - 1);
      z[ix + 1] = -0.3 + 0.6 * j / (g - 1);
      if (2 * j + 1 == g) z[ix + 1] = 0.0;
      grid.push_back(z);
    }
  }
  for (std::size_t k = 0; k < g * g; ++k) {
    Point z(dim);
    for (auto& v : z) v = ctx.uniform(-0.3, 0.3);
    z[ix] = ctx.uniform(-0.98, 0.98);
    if (k % 4 == 1) z.back() = 0.0;
    if (k % 4 == 2) {
      for (std::size_t i = 0; i <= ix; ++i) z[i] = i == ix ? z[i] : 0.0;
      z.back() = 0.0;
    }
    grid.push_back(z);
  }
  check_classification(ctx, "classification", *F, in_Z, grid, in_margin);

  const Sampler near = [&ctx, dim, ix, s] {
    Point z(dim);
    for (auto& v : z) v = ctx.uniform(-0.4 * s, 0.4 * s);
    z[ix] = ctx.uniform(-0.6, 0.95);
    return z;
  };
  check_symplecticity(ctx, *F, near, ctx.symplectic_or(100), 1e-5);
  check_inverse(ctx, *F, near, ctx.inverse_or(200));
  check_locality(ctx, *F,
                 [&ctx, &U, dim, ix] {
                   Point z(dim);
                   do {
                     for (auto& v : z) v = ctx.uniform(-2.0, 2.0);
                     z[ix] = ctx.uniform(-0.99, 0.99);
                   } while (!U.outside(z));
                   return z;
                 },
                 200);
  check_flatness(ctx, *F,
                 [&ctx, dim, ix, s] {
                   Point z(dim);
                   for (auto& v : z) v = ctx.uniform(-0.8 * s, 0.8 * s);
                   z[ix] = ctx.uniform(-0.99, 0.99);
                   return z;
                 },
                 1000);
  // |F| <= sqrt(h(x) / 2) with h = 0.25 (1 - x), so the level |F| = c stays
  // 8 c^2 away from the chart end. Levels below 1.2e-3 come closer than
  // 10 delta_esc and cannot be told apart from an escape; they are skipped.
  std::size_t k = 0;
  check_backward(ctx, *F,
                 [&] {
                   for (;;) {
                     Point z = near();
                     if (k++ % 2 == 0) {
                       for (std::size_t i = 0; i < dim; ++i) z[i] = i == ix ? z[i] : 0.0;
                       return z;
                     }
                     const double c = std::abs(F->value(z));
                     if (c == 0.0 || c >= 1.2e-3) return z;
                   }
                 },
                 200);

  Point axis(dim, 0.0);
  axis[ix] = 0.5;
  add_trajectory(ctx, "axis_excised", *F, axis, 1.05);
  axis[ix] = -0.2;
  add_trajectory(ctx, "axis_survivor", *F, axis, 1.05);
  Point off(dim, 0.0);
  off[0] = n == 1 ? 0.3 : 0.1;
  off[ix] = 0.3;
  off.back() = 0.1;
  add_trajectory(ctx, "off_axis", *F, off, 2.0);
}

}  // namespace excision::lab
