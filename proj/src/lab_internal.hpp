#pragma once

#include <functional>
#include <random>
#include <span>
#include <string>

#include "excision/ham_extension.hpp"
#include "excision/lab.hpp"
#include "excision/symflow.hpp"

namespace excision::lab {

using Sampler = std::function<Point()>;
using Predicate = std::function<bool(std::span<const double>)>;

struct Context {
  Context(const ScenarioConfig& c, ScenarioReport& r, double default_tol);

  const ScenarioConfig& cfg;
  ScenarioReport& report;
  std::mt19937_64 rng;
  IntegratorOptions opts;
  // Energy drift over every Completed trajectory the suite ran.
  double drift = 0.0;
  std::size_t drift_points = 0;

  double uniform(double lo, double hi);
  std::size_t grid_or(std::size_t fallback) const { return cfg.grid ? cfg.grid : fallback; }
  std::size_t symplectic_or(std::size_t n) const {
    return cfg.symplectic_points ? cfg.symplectic_points : n;
  }
  std::size_t inverse_or(std::size_t n) const { return cfg.inverse_points ? cfg.inverse_points : n; }
  void record(const std::string& name, std::size_t points, double residual, bool pass);
  void note_drift(const FlowOutcome& o);
};

// Hamiltonian certification pieces shared by the field scenarios.
void check_classification(Context& ctx, const std::string& name, const HamiltonianField& F,
                          const Predicate& in_Z, const std::vector<Point>& grid,
                          const Predicate& in_margin);
void check_symplecticity(Context& ctx, const HamiltonianField& F, const Sampler& sample,
                         std::size_t count, double bound);
void check_symplecticity(Context& ctx, const BatchMap& map, const Sampler& sample,
                         std::size_t count, double bound);
void check_inverse(Context& ctx, const HamiltonianField& F, const Sampler& sample,
                   std::size_t count);
/// Sampled points lie outside U: both time-1 maps must return them bit for bit.
void check_locality(Context& ctx, const HamiltonianField& F, const Sampler& sample,
                    std::size_t count);
/// grad F = 0 wherever F = 0 off N.
void check_flatness(Context& ctx, const HamiltonianField& F, const Sampler& sample,
                    std::size_t count);
/// S = -inf: the backward flow runs to t = -2 without leaving the chart.
void check_backward(Context& ctx, const HamiltonianField& F, const Sampler& sample,
                    std::size_t count);
void finish_conservation(Context& ctx);
void add_trajectory(Context& ctx, const std::string& name, const HamiltonianField& F,
                    const Point& z, double t);

ScenarioReport run_single(const ScenarioConfig& config);

void run_ray(Context& ctx);
void run_epigraph(Context& ctx);
void run_cantor_brush(Context& ctx);
void run_box_tail(Context& ctx);
void run_tree(Context& ctx);

}  // namespace excision::lab
