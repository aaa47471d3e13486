#include "excision/quadrature.hpp"

#include <cmath>
#include <queue>
#include <vector>

namespace excision::quad {

namespace {

// Abscissae and weights for the 7-point Gauss / 15-point Kronrod pair.
constexpr double kXgk[8] = {0.991455371120812639206854697526329,
                            0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926,
                            0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013,
                            0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245,
                            0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970,
                            0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518,
                            0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550,
                            0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649,
                            0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082,
                           0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975,
                           0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  int level;
  bool operator<(const Panel& o) const { return error < o.error; }
};

}  // namespace

double gauss_kronrod15(const Integrand& f, double a, double b, double& err) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  err = std::abs((kronrod - gauss) * half);
  return kronrod * half;
}

Result integrate(const Integrand& f, double a, double b, double rel_tol,
                 double abs_tol, int max_levels) {
  if (a == b) return {};
  std::priority_queue<Panel> heap;
  double err = 0.0;
  const double value = gauss_kronrod15(f, a, b, err);
  heap.push({a, b, value, err, 0});
  double total = value;
  double total_err = err;
  bool converged = true;
  constexpr int kMaxPanels = 20000;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (!std::isfinite(total)) break;
    Panel worst = heap.top();
    if (worst.level >= max_levels || static_cast<int>(heap.size()) >= kMaxPanels) {
      converged = false;
      break;
    }
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    double e1 = 0.0, e2 = 0.0;
    const double v1 = gauss_kronrod15(f, worst.a, mid, e1);
    const double v2 = gauss_kronrod15(f, mid, worst.b, e2);
    total += v1 + v2 - worst.value;
    total_err += e1 + e2 - worst.error;
    heap.push({worst.a, mid, v1, e1, worst.level + 1});
    heap.push({mid, worst.b, v2, e2, worst.level + 1});
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  double sum = 0.0, esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  return {sum, esum, converged && std::isfinite(sum)};
}

ImproperResult integrate_to_endpoint(const Integrand& f, double x, double end,
                                     double rel_tol, double divergence_cap) {
  ImproperResult out;
  const double span = end - x;
  if (span == 0.0) return out;
  // Panels stop well before double precision runs out near the endpoint, so
  // the last panel ratios are not polluted by rounding.
  const double floor = 1e-9 * std::max(1.0, std::abs(end));
  constexpr int kWindow = 8;
  std::vector<double> log_ratios;
  double prev_piece = 0.0, prev_ratio = 1.0;
  double lo = x;
  // Panel k covers [x + span*(1 - 2^-k), x + span*(1 - 2^-(k+1))].
  for (int k = 0; k < 1100; ++k) {
    const double hi = x + span * (1.0 - std::ldexp(1.0, -(k + 1)));
    if (std::abs(end - hi) < floor) break;
    // Each panel sits one panel-width from the end, so the integrand is tame
    // on it; a shallow level cap keeps rounding noise from driving refinement.
    const Result r = integrate(f, lo, hi, rel_tol * 0.1, 1e-15, 16);
    const double piece = r.value;
    if (!std::isfinite(piece)) {
      out.value = piece;
      out.diverged = true;
      return out;
    }
    out.value += piece;
    if (std::abs(out.value) > divergence_cap) {
      out.diverged = true;
      return out;
    }
    if (k > 0) {
      const double ratio = std::abs(piece) / std::max(std::abs(prev_piece), 1e-300);
      log_ratios.push_back(std::log(std::max(ratio, 1e-300)));
      // Geometric tail bound for the panels not yet visited, trusted only
      // after two decaying ratios in a row: a bulky first panel followed by
      // a slowly divergent tail looks geometric for one step.
      const double q = std::max(ratio, prev_ratio);
      if (k > 1 && q <= 0.75 &&
          std::abs(piece) * q / (1.0 - q) <= rel_tol * std::max(std::abs(out.value), 1e-300)) {
        out.value += piece * q / (1.0 - q);
        return out;
      }
      prev_ratio = ratio;
    }
    prev_piece = piece;
    lo = hi;
  }
  if (log_ratios.size() < kWindow) {
    out.converged = false;
    return out;
  }
  // Resolution limit reached: extrapolate from the mean decay of the last
  // panels. Power-law blow-up (1 - s)^-p gives ratio 2^(p-1), so ratios near
  // one mean p near one or worse.
  double mean = 0.0;
  for (std::size_t i = log_ratios.size() - kWindow; i < log_ratios.size(); ++i) {
    mean += log_ratios[i];
  }
  const double ratio = std::exp(mean / kWindow);
  if (ratio >= 0.97) {
    out.diverged = true;
    return out;
  }
  out.value += prev_piece * ratio / (1.0 - ratio);
  return out;
}

}  // namespace excision::quad
