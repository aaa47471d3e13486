#include <algorithm>
#include <cmath>

#include "excision/errors.hpp"
#include "lab_internal.hpp"

namespace excision::lab {

namespace {

constexpr double kInverseBound = 1e-7;
constexpr double kDriftBound = 1e-7;
constexpr double kFlatBound = 1e-10;

double max_gap(const Point& a, const Point& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

Context::Context(const ScenarioConfig& c, ScenarioReport& r, double default_tol)
    : cfg(c), report(r), rng(c.seed) {
  opts.tol = c.tol > 0.0 ? c.tol : default_tol;
}

double Context::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void Context::record(const std::string& name, std::size_t points, double residual, bool pass) {
  report.checks[name] = {points, residual, pass};
}

void Context::note_drift(const FlowOutcome& o) {
  if (o.status != FlowStatus::Completed) return;
  drift = std::max(drift, o.energy_drift);
  ++drift_points;
}

void check_classification(Context& ctx, const std::string& name, const HamiltonianField& F,
                          const Predicate& in_Z, const std::vector<Point>& grid,
                          const Predicate& in_margin) {
  EscapeProbe probe;
  probe.integrator = ctx.opts;
  const EscapeReport rep = classify_escape(F, in_Z, grid, in_margin, probe);
  for (const auto& o : rep.outcomes) {
    if (!o.endpoint.empty()) ctx.note_drift(o);
  }
  ctx.record(name, rep.checked, static_cast<double>(rep.mismatches.size()),
             rep.mismatches.empty() && rep.checked > 0);
}

void check_symplecticity(Context& ctx, const HamiltonianField& F, const Sampler& sample,
                         std::size_t count, double bound) {
  check_symplecticity(ctx, time1_batch(F, 1.0, ctx.opts), sample, count, bound);
}

void check_symplecticity(Context& ctx, const BatchMap& map, const Sampler& sample,
                         std::size_t count, double bound) {
  std::size_t done = 0;
  double worst = 0.0;
  bool failed = false;
  for (std::size_t tries = 0; done < count && tries < 20 * count; ++tries) {
    const Point z = sample();
    try {
      worst = std::max(worst, check_symplectic(map, z).residual);
      ++done;
    } catch (const ExcisedPointError&) {
      // Not a surviving point.
    } catch (const StencilError&) {
    } catch (const ToleranceFailure&) {
      failed = true;
      ++done;
    }
  }
  ctx.record("symplecticity", done, worst, !failed && done == count && worst <= bound);
}

void check_inverse(Context& ctx, const HamiltonianField& F, const Sampler& sample,
                   std::size_t count) {
  std::size_t done = 0;
  double worst = 0.0;
  bool failed = false;
  for (std::size_t tries = 0; done < count && tries < 20 * count; ++tries) {
    const Point z = sample();
    try {
      const Point f = time1_map(F, z, ctx.opts);
      worst = std::max(worst, max_gap(inverse_time1_map(F, f, ctx.opts), z));
      worst = std::max(worst, max_gap(time1_map(F, inverse_time1_map(F, z, ctx.opts), ctx.opts), z));
      ++done;
    } catch (const ExcisedPointError&) {
    } catch (const ToleranceFailure&) {
      failed = true;
      ++done;
    }
  }
  ctx.record("inverse_consistency", done, worst,
             !failed && done == count && worst <= kInverseBound);
}

void check_locality(Context& ctx, const HamiltonianField& F, const Sampler& sample,
                    std::size_t count) {
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const Point z = sample();
    for (double t : {1.0, -1.0}) {
      const FlowOutcome o = integrate(F, z, t, ctx.opts);
      worst = std::max(worst, o.status == FlowStatus::Completed ? max_gap(o.endpoint, z) : kInf);
    }
  }
  ctx.record("locality", count, worst, worst == 0.0);
}

void check_flatness(Context& ctx, const HamiltonianField& F, const Sampler& sample,
                    std::size_t count) {
  std::size_t found = 0;
  double worst = 0.0;
  std::vector<double> grad(F.dim());
  for (std::size_t tries = 0; found < count && tries < 50 * count; ++tries) {
    const Point z = sample();
    if (z.back() == 0.0) continue;
    if (F.value_and_gradient(z, grad) != 0.0) continue;
    ++found;
    for (double g : grad) worst = std::max(worst, std::abs(g));
  }
  ctx.record("flatness", found, worst, found > 0 && worst <= kFlatBound);
}

void check_backward(Context& ctx, const HamiltonianField& F, const Sampler& sample,
                    std::size_t count) {
  std::size_t escaped = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const FlowOutcome o = integrate(F, sample(), -2.0, ctx.opts);
    if (o.status != FlowStatus::Completed) ++escaped;
    ctx.note_drift(o);
  }
  ctx.record("backward_totality", count, static_cast<double>(escaped), escaped == 0);
}

void finish_conservation(Context& ctx) {
  ctx.record("conservation", ctx.drift_points, ctx.drift,
             ctx.drift_points > 0 && ctx.drift <= kDriftBound);
}

void add_trajectory(Context& ctx, const std::string& name, const HamiltonianField& F,
                    const Point& z, double t) {
  std::vector<Point> rows;
  IntegratorOptions o = ctx.opts;
  o.record = &rows;
  ctx.note_drift(integrate(F, z, t, o));
  if (ctx.cfg.trajectories) ctx.report.trajectories[name] = std::move(rows);
}

ScenarioReport run_single(const ScenarioConfig& config) {
  ScenarioReport report;
  report.scenario = config.scenario;
  const bool tree = config.scenario == "tree" || config.scenario == "retract";
  const bool ray = config.scenario == "ray" || config.scenario == "ray-n1";
  // Default tolerances: the loosest that keeps drift and round trips inside
  // their bounds on the scenario's sample.
  const double tol = tree || config.scenario == "epigraph" ? 1e-13
                     : config.scenario == "cantor-brush"    ? 1e-12
                                                            : 1e-11;
  Context ctx(config, report, tol);
  if (ray) {
    run_ray(ctx);
  } else if (config.scenario == "epigraph") {
    run_epigraph(ctx);
  } else if (config.scenario == "cantor-brush") {
    run_cantor_brush(ctx);
  } else if (config.scenario == "box-tail") {
    run_box_tail(ctx);
  } else if (tree) {
    run_tree(ctx);
  } else {
    throw InputError("unknown scenario '" + config.scenario + "'");
  }
  finish_conservation(ctx);
  return report;
}

}  // namespace excision::lab
