#pragma once

#include <functional>

namespace excision::quad {

using Integrand = std::function<double(double)>;

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// Globally adaptive 7/15-point Gauss-Kronrod on a finite interval.
/// Subdivides the worst interval until the summed error estimate drops below
/// max(abs_tol, rel_tol * |value|); an interval is never split more than
/// `max_levels` times.
Result integrate(const Integrand& f, double a, double b, double rel_tol = 1e-10,
                 double abs_tol = 1e-13, int max_levels = 60);

/// Single G7K15 panel; `err` receives |K15 - G7|.
double gauss_kronrod15(const Integrand& f, double a, double b, double& err);

struct ImproperResult {
  double value = 0.0;   // the integral, or the partial sum when divergent
  bool diverged = false;
  bool converged = true;  // false when neither convergence nor divergence was established
};

/// Integral of f over [x, end) (or (end, x] when end < x) where f may blow up
/// at `end`. The range is cut into geometrically shrinking panels toward the
/// endpoint; the per-panel contributions either decay geometrically
/// (convergent) or stall (divergent). Divergence is also declared when the
/// partial sum exceeds `divergence_cap`.
ImproperResult integrate_to_endpoint(const Integrand& f, double x, double end,
                                     double rel_tol = 1e-10,
                                     double divergence_cap = 1e6);

}  // namespace excision::quad
