#pragma once
// Trajectories of X_F with escape detection, and the certification toolkit:
// time-1 maps, finite-difference Jacobians, symplecticity residuals.
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "excision/ham_extension.hpp"

namespace excision {

using Point = std::vector<double>;

enum class FlowStatus { Completed, EscapedChart, ToleranceFailure };

const char* to_string(FlowStatus s);

struct FlowOutcome {
  Point endpoint;
  double elapsed = 0.0;
  FlowStatus status = FlowStatus::Completed;
  // Escape crossing bracket in flow time (signed like t); set when escaped.
  double t_esc_lower = 0.0;
  double t_esc_upper = 0.0;
  std::size_t step_count = 0;
  /// |F(endpoint) - F(z0)|.
  double energy_drift = 0.0;
};

struct IntegratorOptions {
  double tol = 1e-10;
  double delta_esc = 1e-6;
  double r_max = 1e6;
  double bracket_width = 1e-9;  // escape bisection stops at this flow-time width
  std::size_t max_steps = 2'000'000;
  /// When set, every accepted step appends (t, z...) here.
  std::vector<Point>* record = nullptr;
};

FlowOutcome integrate(const HamiltonianField& F, std::span<const double> z0, double t,
                      const IntegratorOptions& options = {});

/// Integrates several initial points with one shared step sequence; the
/// error norm is the maximum over members. Any member escaping stops the
/// whole ensemble with that status.
std::vector<FlowOutcome> integrate_ensemble(const HamiltonianField& F,
                                            const std::vector<Point>& z0, double t,
                                            const IntegratorOptions& options = {});

/// Forward/backward time-1 maps; an escape raises ExcisedPointError.
Point time1_map(const HamiltonianField& F, std::span<const double> z0,
                const IntegratorOptions& options = {});
Point inverse_time1_map(const HamiltonianField& F, std::span<const double> z1,
                        const IntegratorOptions& options = {});

/// Maps a batch of points at once (ensemble integration keeps stencil
/// differences smooth).
using BatchMap = std::function<std::vector<Point>(const std::vector<Point>&)>;

BatchMap time1_batch(const HamiltonianField& F, double direction,
                     IntegratorOptions options = {});
BatchMap pointwise(std::function<Point(const Point&)> map);
/// second(first(.)).
BatchMap compose(BatchMap first, BatchMap second);

/// Row-major square matrix.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> a;
  explicit Matrix(std::size_t size = 0) : n(size), a(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

/// Central differences J_ij = d map_i / d z_j; with richardson the steps h
/// and h/2 are combined to cancel the h^2 term. Raises StencilError when the
/// map is undefined on a stencil point.
Matrix numerical_jacobian(const BatchMap& map, std::span<const double> z, double fd_step = 1e-5,
                          bool richardson = false);

/// max |J^T Omega J - Omega| with Omega the block form of sum dx_i ^ dy_i.
double symplecticity_residual(const Matrix& J);

struct SymplecticCheck {
  Point point;
  Matrix jacobian;
  double residual = 0.0;
  double fd_step = 0.0;
};

SymplecticCheck check_symplectic(const BatchMap& map, std::span<const double> z,
                                 double fd_step = 1e-6, bool richardson = true);

struct EscapeProbe {
  double probe_time = 1.05;  // integrate this far before calling a point survived
  IntegratorOptions integrator;
};

struct EscapeMismatch {
  std::size_t index;
  bool expected_excised;
  FlowOutcome outcome;
};

struct EscapeReport {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // inside the margin band
  std::size_t excised = 0;
  std::vector<EscapeMismatch> mismatches;
  std::vector<FlowOutcome> outcomes;  // per grid point; skipped ones are default
  double max_energy_drift = 0.0;      // over Completed trajectories
};

/// True iff the outcome counts as "T(z) <= 1": it escaped no later than 1.
bool escaped_by_one(const FlowOutcome& o);

EscapeReport classify_escape(const HamiltonianField& F,
                             const std::function<bool(std::span<const double>)>& in_Z,
                             const std::vector<Point>& grid,
                             const std::function<bool(std::span<const double>)>& in_margin,
                             const EscapeProbe& probe = {});

/// Header `t,x1,y1,...,xn,yn` and one row per recorded step.
void write_trajectory_csv(std::ostream& os, const std::vector<Point>& rows);
void write_trajectory_csv(const std::string& path, const std::vector<Point>& rows);

}  // namespace excision
