#include "excision/flow1d.hpp"

#include <cmath>
#include <sstream>

#include "excision/errors.hpp"
#include "excision/quadrature.hpp"

namespace excision {

namespace {

constexpr double kQuadRelTol = 1e-11;
constexpr double kScanStep = 1e-4;
constexpr double kRootTol = 1e-12;

bool vanishes_between(const ScalarField1D& v, double from, double to) {
  if (v.vanishes_on) return v.vanishes_on(from, to);
  // Sampled scan; zeros narrower than the scan step can be missed.
  const double span = to - from;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / kScanStep)));
  for (int i = 0; i <= steps; ++i) {
    const double s = from + span * i / steps;
    if (s <= v.lo || s >= v.hi) continue;
    if (v.eval(s) <= 0.0) return true;
  }
  return false;
}

double reciprocal(const ScalarField1D& v, double s) {
  const double speed = v.eval(s);
  return speed > 0.0 ? 1.0 / speed : kInf;
}

void require_inside(const ScalarField1D& v, double x) {
  if (!v.contains(x)) {
    std::ostringstream os;
    os << "x = " << x << " outside the field interval (" << v.lo << ", " << v.hi << ")";
    throw InputError(os.str());
  }
}

TimeOfFlight time_to_end(const ScalarField1D& v, double x, double end, double sign) {
  if (!std::isfinite(end)) throw InputError("time of flight needs a bounded interval");
  const double lo = std::min(x, end), hi = std::max(x, end);
  if (vanishes_between(v, lo, hi)) return {sign * kInf, TimeMode::ZeroBlocked};
  const auto r = quad::integrate_to_endpoint([&](double s) { return reciprocal(v, s); }, x, end,
                                             kQuadRelTol);
  if (r.diverged) return {sign * kInf, TimeMode::Quadrature};
  if (!r.converged) {
    throw ToleranceFailure("time-of-flight quadrature did not converge", r.value);
  }
  return {sign * std::abs(r.value), TimeMode::Quadrature};
}

double panel_integral(const ScalarField1D& v, double from, double to) {
  if (from == to) return 0.0;
  const double lo = std::min(from, to), hi = std::max(from, to);
  const auto r = quad::integrate([&](double s) { return reciprocal(v, s); }, lo, hi, kQuadRelTol,
                                 1e-15);
  if (!std::isfinite(r.value)) return kInf;
  if (!r.converged) throw ToleranceFailure("travel-time quadrature did not converge", r.value);
  return r.value;
}

}  // namespace

bool TimeOfFlight::finite() const { return std::isfinite(value); }

TimeOfFlight forward_time(const ScalarField1D& v, double x) {
  require_inside(v, x);
  return time_to_end(v, x, v.hi, 1.0);
}

TimeOfFlight backward_time(const ScalarField1D& v, double x) {
  require_inside(v, x);
  return time_to_end(v, x, v.lo, -1.0);
}

double travel_time(const ScalarField1D& v, double from, double to) {
  const double sign = to >= from ? 1.0 : -1.0;
  return sign * panel_integral(v, from, to);
}

double flow_map(const ScalarField1D& v, double t, double x) {
  require_inside(v, x);
  if (t == 0.0 || v.eval(x) == 0.0) return x;
  const bool forward = t > 0.0;
  const TimeOfFlight limit = forward ? forward_time(v, x) : backward_time(v, x);
  auto outside = [&] {
    const TimeOfFlight other = forward ? backward_time(v, x) : forward_time(v, x);
    const double s = forward ? other.value : limit.value;
    const double T = forward ? limit.value : other.value;
    std::ostringstream os;
    os << "t = " << t << " outside the flow domain (" << s << ", " << T << ")";
    return FlowDomainError(os.str(), s, T);
  };
  if (forward ? !(t < limit.value) : !(t > limit.value)) throw outside();
  const double target = std::abs(t);
  const double end = forward ? v.hi : v.lo;
  // Bracket: walk toward the end over geometrically shrinking panels.
  double near = x, near_time = 0.0;
  double far = x;
  for (int k = 1;; ++k) {
    far = x + (end - x) * (1.0 - std::ldexp(1.0, -k));
    // t agrees with the exit time to quadrature accuracy.
    if (far == near || k > 1100) throw outside();
    const double piece = panel_integral(v, near, far);
    if (near_time + piece >= target) break;
    near_time += piece;
    near = far;
  }
  // Bisection on the monotone travel time, accumulated incrementally.
  while (std::abs(far - near) > kRootTol) {
    const double mid = 0.5 * (near + far);
    if (mid == near || mid == far) break;
    const double piece = panel_integral(v, near, mid);
    if (near_time + piece < target) {
      near = mid;
      near_time += piece;
    } else {
      far = mid;
    }
  }
  return 0.5 * (near + far);
}

TimeOfFlight closed_form_Tu(double a, double b, double c, double x) {
  // Validation is shared with the velocity itself.
  model_velocity_u(a, b, c, x);
  const double left = 0.5 * (a - 1.0);
  if (x <= left || b == 1.0 || c > 0.0) return {kInf, TimeMode::ClosedForm};
  const double scale = 1.0 - b;
  if (x >= a) return {(1.0 - x) / scale, TimeMode::ClosedForm};
  const auto r = quad::integrate(
      [=](double s) {
        if (s <= left) return kInf;
        if (s >= a) return 1.0 / scale;
        return (1.0 + std::exp(1.0 / (s - left) - 1.0 / (a - s))) / scale;
      },
      x, a, kQuadRelTol, 1e-15);
  if (!std::isfinite(r.value)) return {kInf, TimeMode::Quadrature};
  if (!r.converged) throw ToleranceFailure("correction integral did not converge", r.value);
  return {(1.0 - a) / scale + r.value, TimeMode::Quadrature};
}

double mu(double a, double b) {
  if (!(a > -1.0 && a < 1.0)) throw InputError("mu: a must lie in (-1, 1)");
  if (!(b >= -1.0 && b < 1.0)) throw InputError("mu: b must lie in [-1, 1)");
  double lo = 0.5 * (a - 1.0);
  double hi = 1.0;
  // T is +inf at lo and tends to 0 at hi; it is strictly decreasing between.
  for (int it = 0; it < 200 && hi - lo > kRootTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double t = closed_form_Tu(a, b, 0.0, mid).value;
    if (t > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double root = 0.5 * (lo + hi);
  const double check = closed_form_Tu(a, b, 0.0, root).value;
  if (!std::isfinite(check) || std::abs(check - 1.0) > 1e-6) {
    throw InternalError("mu: bisection did not bracket T_u = 1");
  }
  return root;
}

bool reaches_end_by_one(double b, double c, double x, double mu_ab) {
  return b < 1.0 && c == 0.0 && mu_ab <= x;
}

}  // namespace excision
