#pragma once

// Time-of-flight functions and flow maps of autonomous 1D equations
// dx/dt = v(x), v >= 0, computed from the integral relation
//   t = integral_{x}^{Phi(t, x)} dxi / v(xi).

#include "excision/scalar_kit.hpp"

namespace excision {

enum class TimeMode { ClosedForm, Quadrature, ZeroBlocked };

struct TimeOfFlight {
  double value;  // +inf / -inf when the trajectory never leaves
  TimeMode mode;

  bool finite() const;
};

/// T_v(x): time to reach the right end of v's interval; +inf if v vanishes
/// on [x, hi) or the improper integral diverges.
TimeOfFlight forward_time(const ScalarField1D& v, double x);

/// S_v(x): minus the time to come from the left end; -inf when blocked.
TimeOfFlight backward_time(const ScalarField1D& v, double x);

/// Integral of 1/v from `from` to `to` (signed), for a proper sub-interval
/// on which v > 0.
double travel_time(const ScalarField1D& v, double from, double to);

/// Phi_v(t, x). Throws FlowDomainError when t is outside (S_v(x), T_v(x)).
double flow_map(const ScalarField1D& v, double t, double x);

/// Forward time of u(a, b, c; .) from the explicit case analysis: the linear
/// branch on [a, 1), the explicit correction integral on ((a-1)/2, a), and
/// +inf whenever c > 0, b = 1 or x <= (a-1)/2.
TimeOfFlight closed_form_Tu(double a, double b, double c, double x);

/// mu(a, b): the unique x with T_u(a, b, 0; x) = 1, found by bisection.
double mu(double a, double b);

/// The exact characterisation T_u(a, b, c; x) <= 1 iff b < 1, c = 0 and
/// mu(a, b) <= x, with mu supplied by the caller.
bool reaches_end_by_one(double b, double c, double x, double mu_ab);

}  // namespace excision
