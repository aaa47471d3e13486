#include "excision/scalar_kit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "excision/errors.hpp"
#include "excision/quadrature.hpp"

namespace excision {

namespace {

// Logistic 1 / (1 + e^q) and its "variance" e^q / (1 + e^q)^2, evaluated
// without overflow for large |q|.
struct Logistic {
  double value;
  double weight;
};

Logistic logistic(double q) {
  const double e = std::exp(-std::abs(q));
  const double inv = 1.0 / (1.0 + e);
  if (q > 0) return {e * inv, e * inv * inv};
  return {inv, e * inv * inv};
}

void require_open_unit(double v, const char* name) {
  if (!(v > -1.0 && v < 1.0)) {
    std::ostringstream os;
    os << name << " = " << v << " is outside (-1, 1)";
    throw InputError(os.str());
  }
}

}  // namespace

double smoothstep_rho(double s) { return s * s * (3.0 - 2.0 * s); }
double smoothstep_rho_deriv(double s) { return 6.0 * s * (1.0 - s); }

Jet smooth_transition(double t) {
  if (t <= 0.0) return {0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0};
  const double q = 1.0 / t - 1.0 / (1.0 - t);
  const Logistic l = logistic(q);
  const double slope = 1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t));
  return {l.value, l.weight == 0.0 ? 0.0 : l.weight * slope};
}

ChiPartials cutoff_chi_a_partials(double a, double x) {
  require_open_unit(a, "a");
  require_open_unit(x, "x");
  const double left = 0.5 * (a - 1.0);
  if (x <= left) return {0.0, 0.0, 0.0};
  if (x >= a) return {1.0, 0.0, 0.0};
  const double dl = x - left;
  const double dr = a - x;
  const Logistic l = logistic(1.0 / dl - 1.0 / dr);
  if (l.weight == 0.0) return {l.value, 0.0, 0.0};
  const double inv_dl2 = 1.0 / (dl * dl);
  const double inv_dr2 = 1.0 / (dr * dr);
  return {l.value, l.weight * (inv_dl2 + inv_dr2), -l.weight * (0.5 * inv_dl2 + inv_dr2)};
}

double cutoff_chi_a(double a, double x) { return cutoff_chi_a_partials(a, x).value; }

UPartials model_velocity_u_partials(double a, double b, double c, double x) {
  if (!(b >= -1.0 && b <= 1.0)) throw InputError("b must lie in [-1, 1]");
  if (!(c >= 0.0 && c <= 1.0)) throw InputError("c must lie in [0, 1]");
  const ChiPartials chi = cutoff_chi_a_partials(a, x);
  const double m = 1.0 - x * x;
  const double denom = m + c;
  const double ratio = m / denom;
  const double ratio_dx = -2.0 * x * c / (denom * denom);
  const double ratio_dc = -m / (denom * denom);
  const double scale = 1.0 - b;
  return {chi.value * scale * ratio,
          scale * (chi.dx * ratio + chi.value * ratio_dx),
          scale * chi.da * ratio,
          -chi.value * ratio,
          scale * chi.value * ratio_dc};
}

double model_velocity_u(double a, double b, double c, double x) {
  return model_velocity_u_partials(a, b, c, x).value;
}

ScalarField1D make_u_field(double a, double b, double c) {
  model_velocity_u(a, b, c, 0.5 * (a + 1.0));  // validates the parameters
  ScalarField1D f;
  f.eval = [=](double x) { return model_velocity_u(a, b, c, x); };
  f.deriv = [=](double x) { return model_velocity_u_partials(a, b, c, x).dx; };
  f.lo = -1.0;
  f.hi = 1.0;
  const double left = 0.5 * (a - 1.0);
  f.vanishes_on = [=](double from, double /*to*/) { return b == 1.0 || from <= left; };
  return f;
}

double bridge_normalization() {
  static const double value = [] {
    const auto r = quad::integrate(
        [](double s) {
          const double m = 1.0 - s * s;
          return m <= 0.0 ? 0.0 : std::exp(-2.0 / m);
        },
        -1.0, 1.0, 1e-14, 1e-17);
    return r.value;
  }();
  return value;
}

BridgePartials bridge_velocity_partials(double a, double b, double tau, double x) {
  if (!(a > 0.0 && a < b && b < 1.0)) throw InputError("bridge velocity needs 0 < a < b < 1");
  if (!(tau > 0.0)) throw InputError("bridge velocity needs tau > 0");
  if (!(x > 0.0 && x < 1.0)) throw InputError("bridge velocity evaluated outside (0, 1)");
  if (x <= a || x >= b) return {1.0, 0.0, 0.0, 0.0, 0.0};
  const double i0 = bridge_normalization();
  const double w = b - a;
  const double k = 0.5 * w * i0;
  const double pa = x - a;
  const double pb = b - x;
  const double prod = pa * pb;
  const double phi = -w * w / (2.0 * prod);
  const double e = std::exp(phi);
  if (e == 0.0) return {1.0, 0.0, 0.0, 0.0, 0.0};
  const double d = k + tau * e;
  const double v = k / d;
  const double du_dk = tau * e / (d * d);
  const double du_de = -k * tau / (d * d);
  const double du_dtau = -k * e / (d * d);
  const double inv_p2 = 1.0 / (prod * prod);
  const double phi_x = 0.5 * w * w * inv_p2 * (pb - pa);
  const double phi_a = w / prod - 0.5 * w * w * pb * inv_p2;
  const double phi_b = -w / prod + 0.5 * w * w * pa * inv_p2;
  return {v,
          du_de * e * phi_x,
          du_dk * (-0.5 * i0) + du_de * e * phi_a,
          du_dk * (0.5 * i0) + du_de * e * phi_b,
          du_dtau};
}

double bridge_velocity(double a, double b, double tau, double x) {
  return bridge_velocity_partials(a, b, tau, x).value;
}

ScalarField1D make_bridge_field(double a, double b, double tau) {
  bridge_velocity(a, b, tau, 0.5 * (a + b));
  ScalarField1D f;
  f.eval = [=](double x) { return bridge_velocity(a, b, tau, x); };
  f.deriv = [=](double x) { return bridge_velocity_partials(a, b, tau, x).dx; };
  f.lo = 0.0;
  f.hi = 1.0;
  f.vanishes_on = [](double, double) { return false; };
  return f;
}

ScalarField1D make_constant_field(double value, double lo, double hi) {
  ScalarField1D f;
  f.eval = [=](double) { return value; };
  f.deriv = [](double) { return 0.0; };
  f.lo = lo;
  f.hi = hi;
  f.vanishes_on = [=](double, double) { return value == 0.0; };
  return f;
}

double reparam_g(double t) {
  require_open_unit(t, "t");
  return t / (1.0 - t * t);
}

double reparam_g_deriv(double t) {
  require_open_unit(t, "t");
  const double m = 1.0 - t * t;
  return (1.0 + t * t) / (m * m);
}

ScalarField1D make_reparam_g() {
  ScalarField1D f;
  f.eval = reparam_g;
  f.deriv = reparam_g_deriv;
  f.lo = -1.0;
  f.hi = 1.0;
  return f;
}

ScalarField1D make_identity() {
  ScalarField1D f;
  f.eval = [](double t) { return t; };
  f.deriv = [](double) { return 1.0; };
  return f;
}

std::pair<double, double> cotangent_lift(const ScalarField1D& g, double x, double y) {
  if (!g.contains(x)) throw InputError("cotangent lift: x outside the domain of g");
  const double slope = g.deriv(x);
  if (slope == 0.0 || !std::isfinite(slope)) {
    throw InputError("cotangent lift: g' vanishes or is not finite");
  }
  return {g.eval(x), y / slope};
}

// -- closed sets ---------------------------------------------------------------

IntervalUnion::IntervalUnion(std::vector<Interval> parts) : parts_(std::move(parts)) {
  std::sort(parts_.begin(), parts_.end(),
            [](const Interval& l, const Interval& r) { return l.lo < r.lo; });
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i].hi < parts_[i].lo) throw InputError("interval with hi < lo");
    if (i > 0 && parts_[i].lo <= parts_[i - 1].hi) {
      throw InputError("interval union parts must be disjoint");
    }
  }
}

IntervalUnion IntervalUnion::point(double x) { return IntervalUnion({{x, x}}); }

IntervalUnion IntervalUnion::closed(double lo, double hi) { return IntervalUnion({{lo, hi}}); }

IntervalUnion IntervalUnion::cantor(double lo, double hi, int depth) {
  if (depth < 0 || depth > 20) throw InputError("Cantor depth must lie in [0, 20]");
  if (!(hi > lo)) throw InputError("Cantor interval must have hi > lo");
  std::vector<Interval> parts{{lo, hi}};
  for (int d = 0; d < depth; ++d) {
    std::vector<Interval> next;
    next.reserve(parts.size() * 2);
    for (const Interval& iv : parts) {
      const double third = (iv.hi - iv.lo) / 3.0;
      next.push_back({iv.lo, iv.lo + third});
      next.push_back({iv.hi - third, iv.hi});
    }
    parts = std::move(next);
  }
  return IntervalUnion(std::move(parts));
}

bool IntervalUnion::contains(double s) const {
  auto it = std::upper_bound(parts_.begin(), parts_.end(), s,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == parts_.begin()) return false;
  --it;
  return s <= it->hi;
}

double IntervalUnion::distance(double s) const {
  if (parts_.empty()) return kInf;
  auto it = std::upper_bound(parts_.begin(), parts_.end(), s,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  double best = kInf;
  if (it != parts_.end()) best = it->lo - s;
  if (it != parts_.begin()) {
    --it;
    best = std::min(best, std::max(0.0, s - it->hi));
  }
  return best;
}

bool ProductSet::contains(std::span<const double> p) const {
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (!factors[j].contains(p[j])) return false;
  }
  return true;
}

double ProductSet::distance(std::span<const double> p) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    const double d = factors[j].distance(p[j]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

ClosedSetSpec::ClosedSetSpec(std::size_t dim, std::vector<ProductSet> pieces)
    : dim_(dim), pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw InputError("closed set needs at least one piece");
  for (const ProductSet& p : pieces_) {
    if (p.factors.size() != dim_) throw InputError("product set dimension mismatch");
    for (const IntervalUnion& f : p.factors) {
      if (f.parts().empty()) throw InputError("empty factor in product set");
    }
  }
}

ClosedSetSpec ClosedSetSpec::point(std::vector<double> p) {
  ProductSet piece;
  for (double v : p) piece.factors.push_back(IntervalUnion::point(v));
  return ClosedSetSpec(p.size(), {piece});
}

ClosedSetSpec ClosedSetSpec::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size()) throw InputError("box corner dimensions differ");
  ProductSet piece;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    piece.factors.push_back(IntervalUnion::closed(lo[j], hi[j]));
  }
  return ClosedSetSpec(lo.size(), {piece});
}

bool ClosedSetSpec::contains(std::span<const double> p) const {
  return std::any_of(pieces_.begin(), pieces_.end(),
                     [&](const ProductSet& s) { return s.contains(p); });
}

double ClosedSetSpec::distance(std::span<const double> p) const {
  double best = kInf;
  for (const ProductSet& s : pieces_) best = std::min(best, s.distance(p));
  return best;
}

ZeroLocusFunction::ZeroLocusFunction(ClosedSetSpec set, double kappa)
    : set_(std::move(set)), kappa_(kappa) {
  if (set_.dim() == 0) throw InputError("zero locus of an empty set description");
  if (!(kappa_ > 0.0)) throw InputError("kappa must be positive");
}

Jet ZeroLocusFunction::factor_profile(const IntervalUnion& u, double s) const {
  const auto& parts = u.parts();
  auto it = std::upper_bound(parts.begin(), parts.end(), s,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  double d = 0.0, dd = 0.0;
  if (it == parts.begin()) {
    d = parts.front().lo - s;
    dd = -1.0;
  } else {
    const Interval& left = *(it - 1);
    if (s <= left.hi) return {0.0, 0.0};
    if (it == parts.end()) {
      d = s - left.hi;
      dd = 1.0;
    } else {
      const double alpha = left.hi;
      const double beta = it->lo;
      const double width = beta - alpha;
      d = (s - alpha) * (beta - s) / width;
      dd = ((beta - s) - (s - alpha)) / width;
    }
  }
  // exp(-kappa/d) below 1e-300 is reported as an exact zero.
  if (d <= kappa_ * 1e-12) return {0.0, 0.0};
  const double v = std::exp(-kappa_ / d);
  return {v, v == 0.0 ? 0.0 : v * kappa_ / (d * d) * dd};
}

double ZeroLocusFunction::value(std::span<const double> p) const {
  std::vector<double> grad(set_.dim());
  return value_and_gradient(p, grad);
}

double ZeroLocusFunction::value_and_gradient(std::span<const double> p,
                                             std::span<double> grad) const {
  if (p.size() != set_.dim() || grad.size() != set_.dim()) {
    throw InputError("zero locus: point dimension mismatch");
  }
  const auto& pieces = set_.pieces();
  const std::size_t n = pieces.size();
  std::vector<double> squashed(n), squashed_d(n);
  std::vector<std::vector<double>> piece_grad(n, std::vector<double>(p.size(), 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const Jet f = factor_profile(pieces[k].factors[j], p[j]);
      sum += f.value;
      piece_grad[k][j] = f.deriv;
    }
    squashed[k] = sum / (1.0 + sum);
    squashed_d[k] = 1.0 / ((1.0 + sum) * (1.0 + sum));
  }
  double value = 1.0;
  for (double s : squashed) value *= s;
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double others = 1.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m != k) others *= squashed[m];
    }
    if (others == 0.0) continue;
    for (std::size_t j = 0; j < p.size(); ++j) {
      grad[j] += others * squashed_d[k] * piece_grad[k][j];
    }
  }
  return value;
}

ZeroLocusFunction zero_locus_function(const ClosedSetSpec& set) { return ZeroLocusFunction(set); }

double vanishing_witness_H1(std::span<const double> z) {
  double sq = 0.0;
  for (double v : z) sq += v * v;
  return 1.0 / (1.0 + sq);
}

}  // namespace excision
