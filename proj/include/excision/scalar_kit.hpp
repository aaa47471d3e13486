#pragma once

// Closed-form smooth building blocks shared by every construction: the cubic
// smoothstep, the exponential cutoff chi_a, the parametrised velocity family
// u(a, b, c; x), the bridge velocity u_{a,b,tau}, the reparametrisation
// t -> t / (1 - t^2) with its cotangent lift, and smooth defining functions of
// closed sets.

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace excision {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A smooth function of one variable on an open interval, with its derivative.
struct ScalarField1D {
  std::function<double(double)> eval;
  std::function<double(double)> deriv;
  double lo = -kInf;
  double hi = kInf;
  /// Optional exact answer to "does the field vanish somewhere in [from, to]?".
  /// When absent, callers fall back to a sampled scan.
  std::function<bool(double from, double to)> vanishes_on;

  double operator()(double x) const { return eval(x); }
  bool contains(double x) const { return x > lo && x < hi; }
};

/// Value and first derivative.
struct Jet {
  double value;
  double deriv;
};

// -- smoothsteps -------------------------------------------------------------

/// rho(s) = 3 s^2 - 2 s^3.
double smoothstep_rho(double s);
double smoothstep_rho_deriv(double s);

/// C-infinity transition: 0 for t <= 0, 1 for t >= 1, flat to all orders at
/// both ends. Same profile as chi_a, rescaled to [0, 1].
Jet smooth_transition(double t);

// -- the u family ----------------------------------------------------------

/// chi_a(x): 0 for x <= (a-1)/2, 1 for x >= a, strictly increasing between.
double cutoff_chi_a(double a, double x);

struct ChiPartials {
  double value, dx, da;
};
ChiPartials cutoff_chi_a_partials(double a, double x);

/// u(a, b, c; x) = chi_a(x) (1 - b) (1 - x^2) / (1 - x^2 + c).
double model_velocity_u(double a, double b, double c, double x);

struct UPartials {
  double value, dx, da, db, dc;
};
UPartials model_velocity_u_partials(double a, double b, double c, double x);

/// The velocity u(a, b, c; .) as a field on (-1, 1), with exact zero test.
ScalarField1D make_u_field(double a, double b, double c);

// -- bridge velocity --------------------------------------------------------

/// Integral of exp(-2 / (1 - s^2)) over (-1, 1).
double bridge_normalization();

/// u_{a,b,tau}(x): 1 outside (a, b); inside, the exponential bump that makes
/// the flow take a to b in time (b - a + tau). Requires 0 < a < b < 1, tau > 0.
double bridge_velocity(double a, double b, double tau, double x);

struct BridgePartials {
  double value, dx, da, db, dtau;
};
BridgePartials bridge_velocity_partials(double a, double b, double tau, double x);

ScalarField1D make_bridge_field(double a, double b, double tau);

ScalarField1D make_constant_field(double value, double lo, double hi);

// -- reparametrisation and cotangent lift -----------------------------------

/// g(t) = t / (1 - t^2), a diffeomorphism (-1, 1) -> R.
double reparam_g(double t);
double reparam_g_deriv(double t);
ScalarField1D make_reparam_g();
ScalarField1D make_identity();

/// (x, y) -> (g(x), y / g'(x)); area preserving for any diffeomorphism g.
std::pair<double, double> cotangent_lift(const ScalarField1D& g, double x, double y);

// -- closed sets and their defining functions -------------------------------

struct Interval {
  double lo, hi;  // closed; lo == hi is a point
};

/// Finite union of disjoint closed intervals, sorted.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(std::vector<Interval> parts);

  static IntervalUnion point(double x);
  static IntervalUnion closed(double lo, double hi);
  /// Depth-K middle-thirds construction on [lo, hi]: 2^K closed intervals
  /// containing the Cantor set.
  static IntervalUnion cantor(double lo, double hi, int depth);

  bool contains(double s) const;
  double distance(double s) const;
  const std::vector<Interval>& parts() const { return parts_; }

 private:
  std::vector<Interval> parts_;
};

/// Product of one interval union per coordinate.
struct ProductSet {
  std::vector<IntervalUnion> factors;
  bool contains(std::span<const double> p) const;
  /// Euclidean distance from p to the product (exact, coordinates independent).
  double distance(std::span<const double> p) const;
};

/// A closed subset of R^dim given as a finite union of product sets (boxes,
/// points and finite-depth Cantor products are all products of interval
/// unions).
class ClosedSetSpec {
 public:
  ClosedSetSpec() = default;
  ClosedSetSpec(std::size_t dim, std::vector<ProductSet> pieces);

  static ClosedSetSpec point(std::vector<double> p);
  static ClosedSetSpec box(std::vector<double> lo, std::vector<double> hi);

  std::size_t dim() const { return dim_; }
  const std::vector<ProductSet>& pieces() const { return pieces_; }
  bool contains(std::span<const double> p) const;
  double distance(std::span<const double> p) const;

 private:
  std::size_t dim_ = 0;
  std::vector<ProductSet> pieces_;
};

/// Smooth c : R^dim -> [0, 1) with c = 0 exactly on the set and all
/// derivatives vanishing there. Off the set the profile is exp(-kappa / d),
/// d the distance to the nearest interval end in each coordinate (scaled
/// inside finite gaps).
class ZeroLocusFunction {
 public:
  explicit ZeroLocusFunction(ClosedSetSpec set, double kappa = kDefaultKappa);

  static constexpr double kDefaultKappa = 5e-4;

  double value(std::span<const double> p) const;
  /// Returns c(p) and writes the gradient into `grad` (size dim).
  double value_and_gradient(std::span<const double> p, std::span<double> grad) const;
  const ClosedSetSpec& set() const { return set_; }

 private:
  Jet factor_profile(const IntervalUnion& u, double s) const;
  ClosedSetSpec set_;
  double kappa_;
};

ZeroLocusFunction zero_locus_function(const ClosedSetSpec& set);

/// H1(z) = 1 / (1 + |z|^2): positive, with bounded superlevel sets.
double vanishing_witness_H1(std::span<const double> z);

}  // namespace excision
