#include <algorithm>
#include <cmath>

#include "excision/errors.hpp"
#include "excision/lsc_fields.hpp"
#include "excision/null_fields.hpp"
#include "lab_internal.hpp"

namespace excision::lab {

namespace {

// Phase space (p1, p2, x, y) over a two-dimensional base.
constexpr std::size_t kX = 2;
constexpr std::size_t kY = 3;

NeighbourhoodSpec base_box(std::vector<double> inner_lo, std::vector<double> inner_hi,
                           double collar) {
  NeighbourhoodSpec U;
  for (std::size_t i = 0; i < 2; ++i) {
    U.inner_lo.push_back(inner_lo[i]);
    U.inner_hi.push_back(inner_hi[i]);
    U.outer_lo.push_back(inner_lo[i] - collar);
    U.outer_hi.push_back(inner_hi[i] + collar);
  }
  for (int i = 0; i < 2; ++i) {
    U.inner_lo.push_back(-kInf);
    U.inner_hi.push_back(kInf);
    U.outer_lo.push_back(-kInf);
    U.outer_hi.push_back(kInf);
  }
  return U;
}

std::span<const double> base(std::span<const double> z) { return z.first(2); }

// Points outside the outer box of U, with x in the chart.
Sampler outside_sampler(Context& ctx, const NeighbourhoodSpec& U, double lo, double hi) {
  return [&ctx, U, lo, hi] {
    Point z(4);
    do {
      z = {ctx.uniform(-3.0, 3.0), ctx.uniform(-3.0, 3.0), ctx.uniform(lo, hi),
           ctx.uniform(-1.0, 1.0)};
    } while (!U.outside(z));
    return z;
  };
}

// Brute-force membership in the depth-d middle-thirds set.
bool cantor_member(double s, double lo, double hi, int depth) {
  if (s < lo || s > hi) return false;
  if (depth == 0) return true;
  const double third = (hi - lo) / 3.0;
  return cantor_member(s, lo, lo + third, depth - 1) ||
         cantor_member(s, hi - third, hi, depth - 1);
}

}  // namespace

// ---------------------------------------------------------------------------

void run_epigraph(Context& ctx) {
  const std::vector<double> lo{-0.2, 0.1}, hi{0.3, 0.4};
  const EpigraphSpec spec{ClosedSetSpec::box(lo, hi), SmoothFunction::affine(0.1, {0.2, -0.3})};
  const auto field = build_epigraph_field(spec);
  const double margin = ctx.cfg.margin;
  const auto member = [&spec](std::span<const double> p, double x) {
    return spec.C.contains(p) && x >= spec.lambda(p);
  };
  // Distance from p to the box boundary (inside) or to the box (outside).
  const auto box_gap = [&](std::span<const double> p) {
    if (!spec.C.contains(p)) return spec.C.distance(p);
    double d = kInf;
    for (std::size_t i = 0; i < 2; ++i) d = std::min({d, p[i] - lo[i], hi[i] - p[i]});
    return d;
  };
  const auto near_boundary = [&](std::span<const double> p, double x) {
    if (box_gap(p) < margin) return true;
    return spec.C.contains(p) && std::abs(x - spec.lambda(p)) < margin;
  };

  // Fibre classification of the null field on a g x g slice p2 = 0.25.
  const std::size_t g = ctx.grid_or(100);
  std::size_t checked = 0, wrong = 0;
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      const std::vector<double> p{-0.5 + 1.1 * i / (g - 1), 0.25};
      const double x = -0.98 + 1.96 * j / (g - 1);
      if (near_boundary(p, x)) continue;
      ++checked;
      if ((classify_epigraph(*field, p, x) == Verdict::Excised) != member(p, x)) ++wrong;
    }
  }
  ctx.record("classification_presymplectic", checked, static_cast<double>(wrong),
             checked > 0 && wrong == 0);

  ExcisionTarget Z;
  Z.contains = member;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const std::vector<double> p{lo[0] + (hi[0] - lo[0]) * i / 20.0,
                                  lo[1] + (hi[1] - lo[1]) * j / 20.0};
      const double lam = spec.lambda(p);
      for (double t : {0.0, 0.5, 0.99}) Z.samples.push_back({p[0], p[1], lam + t * (1.0 - lam)});
    }
  }
  const NeighbourhoodSpec U = base_box({-0.3, 0.0}, {0.4, 0.5}, 0.1);
  const auto F = localize(extend_null_field(field, Z), U, Z);

  const auto in_Z = [&](std::span<const double> z) { return z[kY] == 0.0 && member(base(z), z[kX]); };
  const auto in_margin = [&](std::span<const double> z) {
    return std::abs(z[kY]) < margin && near_boundary(base(z), z[kX]);
  };
  const std::size_t hg = std::max<std::size_t>(4, g / 4);
  std::vector<Point> grid;
  for (const auto& [p2, y] : std::vector<std::pair<double, double>>{
           {0.25, 0.0}, {0.15, 0.0}, {0.25, 0.01}, {0.35, -0.02}}) {
    for (std::size_t i = 0; i < hg; ++i) {
      for (std::size_t j = 0; j < hg; ++j) {
        grid.push_back({-0.5 + 1.1 * i / (hg - 1), p2, -0.96 + 1.92 * j / (hg - 1), y});
      }
    }
  }
  check_classification(ctx, "classification", *F, in_Z, grid, in_margin);

  // Survivors: on N below the graph or off C; off N only where the orbit is
  // well conditioned, i.e. over base points 0.05 clear of the boundary of C,
  // x <= 0.6 and, inside C, 0.1 below the graph. Above the graph, near the
  // chart end or close to the boundary, off-N orbits shear in the cutoff
  // band or on the scale of the zero-locus function and the
  // finite-difference Jacobian loses its digits.
  std::size_t k = 0;
  const Sampler near = [&] {
    const bool on_n = k++ % 2 == 0;
    for (;;) {
      const std::vector<double> p{ctx.uniform(-0.3, 0.4), ctx.uniform(0.0, 0.5)};
      const double x = ctx.uniform(-0.9, 0.9);
      const bool inside = spec.C.contains(p);
      if (on_n) {
        if (!inside || x < spec.lambda(p)) return Point{p[0], p[1], x, 0.0};
      } else if (box_gap(p) >= 0.05 && x <= 0.6 && (!inside || x < spec.lambda(p) - 0.1)) {
        return Point{p[0], p[1], x, ctx.uniform(-0.02, 0.02)};
      }
    }
  };
  check_symplecticity(ctx, *F, near, ctx.symplectic_or(100), 1e-5);
  check_inverse(ctx, *F, near, ctx.inverse_or(200));
  check_locality(ctx, *F, outside_sampler(ctx, U, -0.99, 0.99), 200);
  check_flatness(ctx, *F,
                 [&] {
                   return Point{ctx.uniform(-0.4, 0.5), ctx.uniform(-0.1, 0.6),
                                ctx.uniform(-0.99, 0.99), ctx.uniform(-2.0, 2.0)};
                 },
                 1000);
  check_backward(ctx, *F, near, 200);

  add_trajectory(ctx, "excised", *F, {0.0, 0.25, 0.5, 0.0}, 1.05);
  add_trajectory(ctx, "survivor", *F, {0.0, 0.25, -0.3, 0.0}, 1.05);
  add_trajectory(ctx, "off_n", *F, {0.0, 0.25, 0.3, 0.05}, 2.0);
}

// ---------------------------------------------------------------------------

void run_cantor_brush(Context& ctx) {
  const int depth = ctx.cfg.cantor_depth;
  const IntervalUnion cantor = IntervalUnion::cantor(0.0, 1.0, depth);
  const EpigraphSpec spec{
      ClosedSetSpec(2, {ProductSet{{IntervalUnion::point(0.0), cantor}}}),
      SmoothFunction::constant(2, 0.0)};
  const auto field = build_epigraph_field(spec);
  const double margin = ctx.cfg.margin;

  ExcisionTarget Z;
  Z.contains = [&spec](std::span<const double> p, double x) {
    return spec.C.contains(p) && x >= 0.0;
  };
  for (const auto& part : cantor.parts()) {
    for (double x : {0.0, 0.5, 0.99}) {
      Z.samples.push_back({0.0, part.lo, x});
      Z.samples.push_back({0.0, part.hi, x});
    }
  }
  const NeighbourhoodSpec U = base_box({-0.05, -0.05}, {0.05, 1.05}, 0.05);
  const auto F = localize(extend_null_field(field, Z), U, Z);

  const auto in_Z = [depth](std::span<const double> z) {
    return z[0] == 0.0 && z[kY] == 0.0 && z[kX] >= 0.0 && cantor_member(z[1], 0.0, 1.0, depth);
  };
  const auto in_margin = [&](std::span<const double> z) {
    if (in_Z(z)) return std::abs(z[kX]) < margin;
    const double d = std::hypot(std::hypot(z[0], z[kY]), cantor.distance(z[1]), std::max(0.0, -z[kX]));
    return d < margin;
  };
  // g values of p2 times g/4 values of x, for four (p1, y) slices: the brush
  // slice on N, a parallel slice on N, and two off N. Off N the slices keep
  // |p1| >= 0.01: closer in, the zero-locus function varies on the scale
  // kappa and orbits turn stiff.
  const std::size_t g = ctx.grid_or(100);
  const std::size_t gx = std::max<std::size_t>(2, g / 4);
  std::vector<Point> grid;
  for (const auto& [p1, y] : std::vector<std::pair<double, double>>{
           {0.0, 0.0}, {0.01, 0.0}, {0.01, 0.01}, {-0.02, -0.02}}) {
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = 0; j < gx; ++j) {
        grid.push_back({p1, -0.1 + 1.2 * (i + 0.5) / g, -0.96 + 1.92 * (j + 0.5) / gx, y});
      }
    }
  }
  check_classification(ctx, "classification", *F, in_Z, grid, in_margin);

  // Survivors: half on the brush slice below x = 0, a quarter elsewhere on
  // N, a quarter off N with |p1| >= 0.01, x <= 0.6 and small y. On the slice and off N,
  // p2 lies inside a component of C or at least 0.01 from it: nearer C the
  // zero-locus function varies on the scale kappa and orbits turn stiff.
  std::size_t k = 0;
  const auto gap_p2 = [&] {
    for (;;) {
      const double s = ctx.uniform(0.0, 1.0);
      if (cantor.distance(s) >= 0.01) return s;
    }
  };
  const auto in_c = [&] {
    const auto& parts = cantor.parts();
    const auto& part = parts[static_cast<std::size_t>(ctx.uniform(0.0, 1.0) * parts.size()) % parts.size()];
    return ctx.uniform(part.lo, part.hi);
  };
  const auto side = [&] { return ctx.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0; };
  const Sampler near = [&] {
    switch (k++ % 4) {
      case 0:
        return Point{0.0, in_c(), ctx.uniform(-0.9, -0.01), 0.0};
      case 2:
        return Point{0.0, gap_p2(), ctx.uniform(-0.9, 0.9), 0.0};
      case 1:
        return Point{side() * ctx.uniform(0.01, 0.05), ctx.uniform(0.0, 1.0),
                     ctx.uniform(-0.9, 0.9), 0.0};
      default:
        return Point{side() * ctx.uniform(0.01, 0.05), gap_p2(), ctx.uniform(-0.9, 0.6),
                     ctx.uniform(-0.02, 0.02)};
    }
  };
  check_symplecticity(ctx, *F, near, ctx.symplectic_or(100), 1e-5);
  check_inverse(ctx, *F, near, ctx.inverse_or(200));
  check_locality(ctx, *F, outside_sampler(ctx, U, -0.99, 0.99), 200);
  check_flatness(ctx, *F,
                 [&] {
                   return Point{ctx.uniform(-0.2, 0.2), ctx.uniform(-0.2, 1.2),
                                ctx.uniform(-0.99, 0.99), ctx.uniform(-2.0, 2.0)};
                 },
                 1000);
  std::size_t b = 0;
  check_backward(ctx, *F,
                 [&] {
                   if (b++ % 3 != 0) return near();
                   const auto& parts = cantor.parts();
                   const auto& part = parts[static_cast<std::size_t>(
                       ctx.uniform(0.0, 1.0) * parts.size()) % parts.size()];
                   return Point{0.0, part.lo, ctx.uniform(-0.9, 0.9), 0.0};
                 },
                 200);

  const double leaf = cantor.parts()[1].lo;
  add_trajectory(ctx, "excised", *F, {0.0, leaf, 0.5, 0.0}, 1.05);
  add_trajectory(ctx, "survivor", *F, {0.0, leaf, -0.3, 0.0}, 1.05);
  add_trajectory(ctx, "off_n", *F, {0.01, 0.5, 0.3, 0.05}, 2.0);
}

// ---------------------------------------------------------------------------

void run_box_tail(Context& ctx) {
  const LscSpec spec = box_tail_spec();
  LscOptions options;
  options.depth = ctx.cfg.lsc_depth;
  const auto G = build_lsc_field(spec, options);
  const std::size_t N = G->depth();
  const double margin = ctx.cfg.margin;

  // Base grid on the region where the localizing bump is 1.
  const std::size_t g = ctx.grid_or(50);
  std::vector<std::vector<double>> ps;
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      ps.push_back({-1.25 + 2.5 * i / (g - 1), -1.25 + 2.5 * j / (g - 1)});
    }
  }

  // Level n: T_n(f_n) = 1 and T_n(f_n - margin) > 1; with v_n > 0 the fibre
  // time is strictly decreasing, so T_n <= 1 exactly on x >= f_n.
  {
    std::size_t points = 0;
    double worst = 0.0;
    bool ok = true;
    for (std::size_t n = 1; n <= N; ++n) {
      const FieldPtr level = G->level(n);
      const SmoothFunction f = G->f(n);
      for (const auto& p : ps) {
        const double fn = f(p);
        const ScalarField1D fib = level->fiber(p);
        const double t = forward_time(fib, fn).value;
        worst = std::max(worst, std::abs(t - 1.0));
        if (fn - margin > 0.0 && !(t + travel_time(fib, fn - margin, fn) > 1.0)) ok = false;
        ++points;
      }
    }
    ctx.record("level_classification", points, worst, ok && worst <= 1e-6);
  }

  // Limit: survives iff x < lambda(p), off the margin band; the tail point is
  // added to the grid.
  {
    std::vector<std::vector<double>> lp = ps;
    lp.push_back({0.0, 0.0});
    std::size_t points = 0, wrong = 0;
    for (const auto& p : lp) {
      const double lam = spec.lambda(p);
      for (int k = 1; k < 50; ++k) {
        const double x = k / 50.0;
        if (std::abs(x - lam) < margin) continue;
        ++points;
        const bool survives = G->classify_limit(p, x) == LimitVerdict::Survives;
        if (survives != (x < lam)) ++wrong;
      }
    }
    ctx.record("limit_classification", points, static_cast<double>(wrong), wrong == 0);
  }

  // Baire sequence: strictly increasing below lambda, gap <= 0.05 at depth <= 12.
  {
    const BaireSequence& seq = G->baire();
    const std::size_t top = std::min<std::size_t>(seq.size(), 12);
    double gap = 0.0;
    bool increasing = true;
    for (const auto& p : ps) {
      const double lam = spec.lambda(p);
      double prev = -kInf;
      for (std::size_t n = 1; n <= seq.size(); ++n) {
        const double v = seq.function(n)(p);
        if (!(v > prev && v < lam)) increasing = false;
        prev = v;
        if (n == top) gap = std::max(gap, lam - v);
      }
    }
    ctx.record("baire_sequence", ps.size(), gap, increasing && gap <= 0.05);
  }

  // Hamiltonian of the glued field, localized over the base.
  ExcisionTarget Z;
  Z.contains = [&spec](std::span<const double> p, double x) { return x >= spec.lambda(p); };
  for (int i = 0; i < 2000; ++i) {
    const double a = -1.25 + 2.5 * std::fmod(i * 0.618034, 1.0);
    const double b = -1.25 + 2.5 * std::fmod(i * 0.7548776, 1.0);
    const std::vector<double> p{a, b};
    const double lam = spec.lambda(p);
    if (lam >= 1.0) continue;
    Z.samples.push_back({a, b, lam + (1.0 - lam) * std::fmod(i * 0.5698403, 1.0) * 0.9999});
  }
  const NeighbourhoodSpec U = base_box({-1.25, -1.25}, {1.25, 1.25}, 0.2);
  const auto F = localize(extend_null_field(G->field(), Z), U, Z);

  const auto in_Z = [&spec](std::span<const double> z) {
    return z[kY] == 0.0 && z[kX] >= spec.lambda(base(z));
  };
  const auto in_margin = [&](std::span<const double> z) {
    return std::abs(z[kY]) < margin && std::abs(z[kX] - spec.lambda(base(z))) < margin;
  };
  // 8 x 8 base points times 9 heights on N; off N orbits are slow to
  // integrate, so only six are probed.
  std::vector<Point> grid;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      for (int k = 1; k <= 9; ++k) grid.push_back({-1.2 + 2.4 * i / 7, -1.2 + 2.4 * j / 7, k / 10.0, 0.0});
    }
  }
  for (const auto& p : std::vector<std::vector<double>>{{0.3, 0.2}, {-0.8, 0.5}, {1.1, -0.4}}) {
    for (double x : {0.3, 0.7}) grid.push_back({p[0], p[1], x, 0.05});
  }
  check_classification(ctx, "classification", *F, in_Z, grid, in_margin);

  // Survivors on N below the graph, and a few off N 0.1 below it with small
  // y; base points stay 0.15 clear of the jumps of lambda (box edge, tail),
  // where the Baire levels are steep.
  const auto clear = [](const std::vector<double>& p) {
    const double m = std::max(std::abs(p[0]), std::abs(p[1]));
    const double edge = m <= 1.0 ? 1.0 - m
                                 : std::hypot(std::max(0.0, std::abs(p[0]) - 1.0),
                                              std::max(0.0, std::abs(p[1]) - 1.0));
    return std::min(edge, std::hypot(p[0], p[1])) >= 0.15;
  };
  std::size_t k = 0;
  const Sampler near = [&] {
    const bool on_n = k++ % 2 == 0;
    for (;;) {
      const std::vector<double> p{ctx.uniform(-1.2, 1.2), ctx.uniform(-1.2, 1.2)};
      if (!clear(p)) continue;
      const double lam = spec.lambda(p);
      if (on_n) return Point{p[0], p[1], ctx.uniform(0.05, lam - 0.05), 0.0};
      return Point{p[0], p[1], ctx.uniform(0.05, lam - 0.1), ctx.uniform(-0.02, 0.02)};
    }
  };
  check_symplecticity(ctx, *F, near, ctx.symplectic_or(5), 1e-5);
  check_inverse(ctx, *F, near, ctx.inverse_or(10));
  check_locality(ctx, *F, outside_sampler(ctx, U, 0.01, 0.99), 200);
  check_flatness(ctx, *F,
                 [&] {
                   return Point{ctx.uniform(-1.5, 1.5), ctx.uniform(-1.5, 1.5),
                                ctx.uniform(0.01, 0.99), ctx.uniform(-2.0, 2.0)};
                 },
                 300);
  check_backward(ctx, *F, near, 10);

  add_trajectory(ctx, "excised", *F, {0.3, 0.2, 0.6, 0.0}, 1.05);
  add_trajectory(ctx, "survivor", *F, {0.3, 0.2, 0.3, 0.0}, 1.05);
  add_trajectory(ctx, "tail_excised", *F, {0.0, 0.0, 0.3, 0.0}, 1.05);
}

}  // namespace excision::lab
