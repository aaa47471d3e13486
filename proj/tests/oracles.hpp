#pragma once

// Test-only helpers: finite differences, low-discrepancy samples and a few
// brute-force references. Nothing here calls into the code under test.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

inline double central_difference(const std::function<double(double)>& f, double x,
                                 double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Van der Corput radical inverse, the 1-D building block of Halton points.
inline double radical_inverse(std::uint32_t i, std::uint32_t base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * (i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

/// i-th Halton point in [0,1)^dim.
inline std::vector<double> halton(std::uint32_t i, std::size_t dim) {
  static const std::uint32_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  std::vector<double> p(dim);
  for (std::size_t d = 0; d < dim; ++d) p[d] = radical_inverse(i + 1, primes[d]);
  return p;
}

/// Membership in the depth-K middle-thirds set by repeated tripling.
inline bool cantor_member(double s, int depth, double lo = 0.0, double hi = 1.0) {
  if (s < lo || s > hi) return false;
  for (int d = 0; d < depth; ++d) {
    const double third = (hi - lo) / 3.0;
    if (s <= lo + third) {
      hi = lo + third;
    } else if (s >= hi - third) {
      lo = hi - third;
    } else {
      return false;
    }
  }
  return true;
}

/// Simpson's rule with n (even) panels; a quadrature independent of the
/// library's Gauss-Kronrod code.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Classical RK4 with fixed step for y' = f(y), scalar.
inline double rk4_scalar(const std::function<double(double)>& f, double y, double t, int steps) {
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2),
                 k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

}  // namespace oracle
