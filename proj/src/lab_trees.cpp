#include <algorithm>
#include <cmath>

#include "excision/errors.hpp"
#include "excision/trees.hpp"
#include "lab_internal.hpp"

namespace excision::lab {

namespace {

constexpr double kInverseBound = 1e-7;

// Point at fraction u along edge e, shifted by `off` along its left normal.
Point along(const TreeSpec& t, std::size_t e, double u, double off = 0.0) {
  const Vec2& a = t.nodes[t.edges[e][0]];
  const Vec2& b = t.nodes[t.edges[e][1]];
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len = std::hypot(dx, dy);
  return {a[0] + u * dx - off * dy / len, a[1] + u * dy + off * dx / len};
}

double gap(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

// Junction nodes and the root: the taper balls of radius 2 w0 around them are
// left out of the classification.
std::vector<Vec2> junctions(const TreeSpec& t) {
  std::vector<std::size_t> degree(t.nodes.size(), 0);
  for (const auto& e : t.edges) {
    ++degree[e[0]];
    ++degree[e[1]];
  }
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (degree[i] >= 2 || i == t.root) out.push_back(t.nodes[i]);
  }
  return out;
}

// Stage by stage orbit of w in ambient coordinates; the clock runs on across
// stages that move the point.
std::vector<Point> staged_orbit(const StagedExcision& S, Point w, const IntegratorOptions& base) {
  std::vector<Point> rows{{0.0, w[0], w[1]}};
  double clock = 0.0;
  for (const Stage& st : S.stages()) {
    if (!st.chart.in_envelope({w[0], w[1]})) continue;
    const auto m = st.chart.to_model({w[0], w[1]});
    std::vector<Point> model;
    IntegratorOptions o = base;
    o.record = &model;
    const FlowOutcome f = integrate(*st.F, Point{(*m)[0], (*m)[1]}, 1.0, o);
    for (const auto& r : model) {
      const Vec2 a = st.chart.to_ambient(r[1], r[2]);
      rows.push_back({clock + r[0], a[0], a[1]});
    }
    clock += f.elapsed;
    if (f.status != FlowStatus::Completed) break;
    const Vec2 a = st.chart.to_ambient(f.endpoint[0], f.endpoint[1]);
    w = {a[0], a[1]};
  }
  return rows;
}

}  // namespace

void run_tree(Context& ctx) {
  const bool retract = ctx.cfg.scenario == "retract";
  TreeSpec t = ctx.cfg.tree ? *ctx.cfg.tree : retract ? segment_retract() : ray_with_two_horns();
  if ((t.mode == RootMode::Retract) != retract) {
    throw InputError("tree mode does not match the scenario");
  }
  const StagedExcision S = retract ? retract_tree(t) : excise_tree(t);
  const double margin = ctx.cfg.margin;
  const std::vector<Vec2> balls = junctions(t);
  const auto near_junction = [&](const Point& w) {
    return std::any_of(balls.begin(), balls.end(), [&](const Vec2& j) {
      return std::hypot(w[0] - j[0], w[1] - j[1]) < 2.0 * t.w0;
    });
  };
  const auto trace = [&](const Point& w, bool inverse) {
    const StageEscape r = S.trace({w[0], w[1]}, inverse, ctx.opts);
    ctx.drift = std::max(ctx.drift, r.max_energy_drift);
    ++ctx.drift_points;
    return r;
  };

  // On-tree samples: each escapes, in the stage of its own branch.
  {
    std::size_t points = 0, wrong = 0;
    for (std::size_t e = 0; e < t.edges.size(); ++e) {
      for (int k = 0; k < 40; ++k) {
        const Point w = along(t, e, (k + 0.5) / 40.0);
        if (near_junction(w)) continue;
        ++points;
        const StageEscape r = trace(w, false);
        if (!r.escaped || S.stages()[*r.escaped].edge != e) ++wrong;
      }
    }
    ctx.record("on_tree_escape", points, static_cast<double>(wrong), points > 0 && wrong == 0);
  }

  // Plane grid over the tree's bounding box: escape iff on the tree.
  double lo[2] = {kInf, kInf}, hi[2] = {-kInf, -kInf};
  for (const auto& n : t.nodes) {
    for (int i = 0; i < 2; ++i) {
      lo[i] = std::min(lo[i], n[i] - 2.0 * t.u_radius);
      hi[i] = std::max(hi[i], n[i] + 2.0 * t.u_radius);
    }
  }
  {
    const std::size_t g = ctx.grid_or(100);
    std::size_t points = 0, wrong = 0;
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = 0; j < g; ++j) {
        const Point w{lo[0] + (hi[0] - lo[0]) * i / (g - 1), lo[1] + (hi[1] - lo[1]) * j / (g - 1)};
        if (near_junction(w)) continue;
        const bool on = t.contains({w[0], w[1]});
        if (!on && t.distance({w[0], w[1]}) < margin) continue;
        ++points;
        if (trace(w, false).escaped.has_value() != on) ++wrong;
      }
    }
    ctx.record("classification", points, static_cast<double>(wrong), points > 0 && wrong == 0);
  }

  const Sampler outside = [&] {
    for (;;) {
      const Point w{ctx.uniform(lo[0] - 1.0, hi[0] + 1.0), ctx.uniform(lo[1] - 1.0, hi[1] + 1.0)};
      if (t.distance({w[0], w[1]}) >= t.u_radius) return w;
    }
  };
  // Survivors within the strips: 0.4 to 0.9 of the way from a branch's leaf
  // end, off the branch by 0.1 to 0.4 of the local strip width (at least
  // 0.004). Orbits starting nearer the leaf or the strip edge can end in the
  // overhang cutoff band, and those hugging the branch turn just short of
  // the node end; either way the time-1 map bends on the scale of the
  // finite-difference step.
  const Sampler near = [&] {
    for (;;) {
      const auto& stages = S.stages();
      const StripChart& c =
          stages[static_cast<std::size_t>(ctx.uniform(0.0, 1.0) * stages.size()) % stages.size()].chart;
      const double u = ctx.uniform(0.4, 0.9);
      const double dx = c.node()[0] - c.leaf()[0], dy = c.node()[1] - c.leaf()[1];
      const double len = std::hypot(dx, dy);
      const double width = c.width((1.0 - u) * len);
      const double off =
          (ctx.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * ctx.uniform(std::max(0.004, 0.1 * width), 0.4 * width);
      const Point w{c.leaf()[0] + u * dx - off * dy / len, c.leaf()[1] + u * dy + off * dx / len};
      if (!near_junction(w)) return w;
    }
  };

  {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Point w = outside();
      worst = std::max({worst, gap(S.forward(w, ctx.opts), w), gap(S.inverse(w, ctx.opts), w)});
    }
    ctx.record("locality", 200, worst, worst == 0.0);
  }

  // Points outside U stay outside and points of U minus T stay in U, both ways.
  {
    std::size_t points = 0, leaks = 0;
    for (int i = 0; i < 100; ++i) {
      for (const Point& w : {outside(), near()}) {
        const bool in_u = t.distance({w[0], w[1]}) < t.u_radius;
        for (bool inverse : {false, true}) {
          const StageEscape r = trace(w, inverse);
          if (r.escaped) continue;
          ++points;
          if ((t.distance({r.point[0], r.point[1]}) < t.u_radius) != in_u) ++leaks;
        }
      }
    }
    ctx.record("containment", points, static_cast<double>(leaks), points > 0 && leaks == 0);
  }

  check_symplecticity(ctx, S.forward_batch(ctx.opts), near, ctx.symplectic_or(100), 2e-5);

  {
    const std::size_t count = ctx.inverse_or(200);
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const Point w = near();
      worst = std::max(worst, gap(S.inverse(S.forward(w, ctx.opts), ctx.opts), w));
      worst = std::max(worst, gap(S.forward(S.inverse(w, ctx.opts), ctx.opts), w));
    }
    ctx.record("inverse_consistency", count, worst, worst <= kInverseBound);
  }

  // One component per edge at z0 when retracting, else one.
  std::size_t expected = 1;
  if (retract) {
    expected = static_cast<std::size_t>(std::count_if(t.edges.begin(), t.edges.end(), [&](const auto& e) {
      return e[0] == t.root || e[1] == t.root;
    }));
    const Point z0{t.nodes[t.root][0], t.nodes[t.root][1]};
    ctx.record("retract_point", 1, gap(S.forward(z0, ctx.opts), z0), S.forward(z0, ctx.opts) == z0);
  }
  ctx.record("components", S.components(), 0.0, S.components() == expected);

  if (ctx.cfg.trajectories) {
    ctx.report.trajectories["on_tree"] = staged_orbit(S, along(t, 0, 0.5), ctx.opts);
    ctx.report.trajectories["near_tree"] = staged_orbit(S, along(t, 0, 0.5, 0.02), ctx.opts);
  }
}

}  // namespace excision::lab
