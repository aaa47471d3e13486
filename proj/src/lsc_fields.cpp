#include "excision/lsc_fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "excision/errors.hpp"
#include "excision/quadrature.hpp"

namespace excision {

namespace {

constexpr double kTauRelTol = 1e-12;

double box_distance(std::span<const double> c, const std::vector<double>& lo,
                    const std::vector<double>& hi) {
  double sq = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double d = std::max({lo[j] - c[j], 0.0, c[j] - hi[j]});
    sq += d * d;
  }
  return std::sqrt(sq);
}

// Points of a (samples per axis)^d lattice over the cube around B(c, r),
// restricted to the ball and to [lo, hi], plus the center.
template <typename Visit>
void ball_lattice(std::span<const double> c, double r, int per_axis, const std::vector<double>& lo,
                  const std::vector<double>& hi, Visit&& visit) {
  const std::size_t d = c.size();
  std::vector<double> q(c.begin(), c.end());
  visit(std::span<const double>(q));
  std::vector<int> idx(d, 0);
  while (true) {
    double sq = 0.0;
    bool inside = true;
    for (std::size_t j = 0; j < d; ++j) {
      q[j] = c[j] - r + 2.0 * r * idx[j] / (per_axis - 1);
      sq += (q[j] - c[j]) * (q[j] - c[j]);
      inside = inside && q[j] >= lo[j] && q[j] <= hi[j];
    }
    if (inside && sq <= r * r * (1 + 1e-12)) visit(std::span<const double>(q));
    std::size_t j = 0;
    for (; j < d; ++j) {
      if (++idx[j] < per_axis) break;
      idx[j] = 0;
    }
    if (j == d) break;
  }
}

void require_ordered(std::initializer_list<double> chain, const char* what) {
  double prev = 0.0;
  for (double v : chain) {
    if (!(v > prev)) {
      std::ostringstream os;
      os << what << ": fields are not strictly ordered in (0, 1)";
      throw InputError(os.str());
    }
    prev = v;
  }
  if (!(prev < 1.0)) throw InputError(std::string(what) + ": top field reaches 1");
}

struct ValueGrad {
  double value;
  std::vector<double> grad;
};

ValueGrad eval_with_gradient(const SmoothFunction& f, std::span<const double> p) {
  ValueGrad out{0.0, std::vector<double>(p.size())};
  f.gradient(p, out.grad);
  out.value = f(p);
  return out;
}

}  // namespace

// -- LscSpec --------------------------------------------------------------------

void LscSpec::validate() const {
  const std::size_t d = base_lo.size();
  if (d == 0 || base_hi.size() != d) throw InputError("lsc: base region dimension mismatch");
  for (std::size_t j = 0; j < d; ++j) {
    if (!(base_hi[j] > base_lo[j])) throw InputError("lsc: base region must have hi > lo");
  }
  for (const LscPiece& piece : pieces) {
    if (piece.lo.size() != d || piece.hi.size() != d) {
      throw InputError("lsc: piece dimension mismatch");
    }
    for (std::size_t j = 0; j < d; ++j) {
      if (piece.hi[j] < piece.lo[j]) throw InputError("lsc: piece with hi < lo");
    }
    if (!(piece.value > 0.0 && piece.value <= 1.0)) {
      throw InputError("lsc: piece values must lie in (0, 1]");
    }
  }
}

double LscSpec::lambda(std::span<const double> p) const {
  double v = 1.0;
  for (const LscPiece& piece : pieces) {
    if (box_distance(p, piece.lo, piece.hi) == 0.0) v = std::min(v, piece.value);
  }
  return v;
}

double LscSpec::inf_over_ball(std::span<const double> c, double r) const {
  double v = 1.0;
  for (const LscPiece& piece : pieces) {
    if (box_distance(c, piece.lo, piece.hi) <= r) v = std::min(v, piece.value);
  }
  return v;
}

bool LscSpec::straddles(std::span<const double> c, double r) const {
  for (const LscPiece& piece : pieces) {
    if (piece.value == 1.0 || box_distance(c, piece.lo, piece.hi) > r) continue;
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (c[j] - r < piece.lo[j] || c[j] + r > piece.hi[j]) return true;
    }
  }
  return false;
}

LscSpec box_tail_spec() {
  LscSpec spec;
  spec.base_lo = {-1.5, -1.5};
  spec.base_hi = {1.5, 1.5};
  spec.pieces.push_back({{-1.0, -1.0}, {1.0, 1.0}, 0.5});
  spec.pieces.push_back({{0.0, 0.0}, {0.0, 0.0}, 0.25});
  return spec;
}

// -- Baire sequence -------------------------------------------------------------

SmoothFunction BaireSequence::function(std::size_t n) const {
  if (n < 1 || n > levels.size()) throw InputError("Baire level out of range");
  return levels[n - 1]->as_function(levels[n - 1]);
}

BaireSequence baire_sequence(const LscSpec& spec, std::size_t count) {
  spec.validate();
  if (count < 2) throw InputError("Baire sequence needs at least two levels");
  const std::size_t d = spec.dim();
  BaireSequence seq;
  std::shared_ptr<const BumpBlend> prev;
  for (std::size_t n = 2; n <= count; ++n) {
    // Bumps have radius <= 1/(4n); each constant stays below the infimum of
    // lambda over the bump ball enlarged by rho = 1/(8n), so the level is
    // below lambda everywhere and bump balls stay inside 1/n-balls around
    // any point they cover. The shrinking margin keeps consecutive levels
    // apart near discontinuities without ever-steeper transitions.
    const double r_max = 1.0 / (4.0 * n);
    const double rho = 1.0 / (8.0 * n);
    const double r_min = rho / 4.0;
    const double shrink = 1.0 - 1.0 / n;
    auto decide = [&](const BumpBlend::Cell& cell) -> BumpBlend::Decision {
      const double r = cell.radius();
      const double hi = spec.inf_over_ball(cell.center, r + rho);
      // Rigorous: every previous bump meeting this support has a smaller constant.
      const double lo = prev ? prev->max_constant_near(cell.center, r) : 0.0;
      if (lo >= hi) {
        if (r > 1e-7) return BumpBlend::Subdivide{};
        std::ostringstream os;
        os << "Baire step " << n << ": previous level reaches lambda near";
        for (double v : cell.center) os << ' ' << v;
        throw InternalError(os.str());
      }
      if (spec.straddles(cell.center, r + rho) && r > r_min * (1.0 + 1e-9)) {
        return BumpBlend::Subdivide{};
      }
      return BumpBlend::Emit{0.5 * (std::max(lo, shrink * hi) + hi)};
    };
    const double max_half = r_max / (kBumpOverlap * std::sqrt(static_cast<double>(d)));
    prev = BumpBlend::build(spec.base_lo, spec.base_hi, max_half, decide);
    if (n == 2) {
      seq.levels.push_back(prev->scaled(0.5));
      seq.cover_radius.push_back(r_max);
    }
    seq.levels.push_back(prev);
    seq.cover_radius.push_back(r_max);
  }
  return seq;
}

// -- majorant ---------------------------------------------------------------------

BallBound blend_bound(std::shared_ptr<const BumpBlend> f) {
  return [f](std::span<const double> c, double r) { return f->max_constant_near(c, r); };
}

BallBound sampled_bound(SmoothFunction f) {
  return [f](std::span<const double> c, double r) {
    constexpr int kPerAxis = 7;
    double sup = -kInf, lip = 0.0;
    const std::vector<double> lo(c.size(), -kInf), hi(c.size(), kInf);
    std::vector<double> g(c.size());
    ball_lattice(c, r, kPerAxis, lo, hi, [&](std::span<const double> q) {
      sup = std::max(sup, f(q));
      f.gradient(q, g);
      double sq = 0.0;
      for (double v : g) sq += v * v;
      lip = std::max(lip, std::sqrt(sq));
    });
    const double spacing = 2.0 * r / (kPerAxis - 1) * std::sqrt(static_cast<double>(c.size()));
    return sup + lip * spacing;
  };
}

std::shared_ptr<const BumpBlend> smooth_majorant(const std::vector<BallBound>& bounds,
                                                 double floor, std::vector<double> lo,
                                                 std::vector<double> hi, double half) {
  auto decide = [&](const BumpBlend::Cell& cell) -> BumpBlend::Decision {
    double u = floor;
    for (const BallBound& b : bounds) u = std::max(u, b(cell.center, cell.radius()));
    if (!(u < 1.0)) throw InputError("smooth majorant: input reaches 1");
    return BumpBlend::Emit{0.5 * (1.0 + u)};
  };
  return BumpBlend::build(std::move(lo), std::move(hi), half, decide);
}

// -- adjust_time_1 ------------------------------------------------------------------

AdjustTime1Field::AdjustTime1Field(SmoothFunction f, SmoothFunction a, SmoothFunction b)
    : f_(std::move(f)), a_(std::move(a)), b_(std::move(b)) {
  if (f_.dim != a_.dim || f_.dim != b_.dim) throw InputError("adjust_time_1: dimension mismatch");
}

std::shared_ptr<const AdjustTime1Field::Column> AdjustTime1Field::column(
    std::span<const double> p, bool with_gradient) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (memo_ && (memo_->has_gradient || !with_gradient) &&
        std::equal(p.begin(), p.end(), memo_->p.begin(), memo_->p.end())) {
      return memo_;
    }
  }
  auto fresh = std::make_shared<Column>();
  Column& col = *fresh;
  col.p.assign(p.begin(), p.end());
  col.f = f_(p);
  col.a = a_(p);
  col.b = b_(p);
  require_ordered({col.f, col.a, col.b}, "adjust_time_1");
  if (with_gradient) {
    col.has_gradient = true;
    col.df.resize(p.size());
    col.da.resize(p.size());
    col.db.resize(p.size());
    f_.gradient(p, col.df);
    a_.gradient(p, col.da);
    b_.gradient(p, col.db);
  }
  std::lock_guard<std::mutex> lock(mutex_);
  memo_ = fresh;
  return fresh;
}

double AdjustTime1Field::velocity(std::span<const double> p, double x) const {
  const auto col = column(p, false);
  return bridge_velocity(col->a, col->b, col->f, x);
}

double AdjustTime1Field::velocity_partials(std::span<const double> p, double x, double& dx,
                                           std::span<double> dp) const {
  const auto col = column(p, true);
  const BridgePartials u = bridge_velocity_partials(col->a, col->b, col->f, x);
  dx = u.dx;
  for (std::size_t j = 0; j < p.size(); ++j) {
    dp[j] = u.da * col->da[j] + u.db * col->db[j] + u.dtau * col->df[j];
  }
  return u.value;
}

// -- adjust_time_2 ------------------------------------------------------------------

AdjustTime2Field::AdjustTime2Field(FieldPtr prev, SmoothFunction f, SmoothFunction h,
                                   SmoothFunction b, SmoothFunction c)
    : prev_(std::move(prev)), f_(std::move(f)), h_(std::move(h)), b_(std::move(b)),
      c_(std::move(c)) {
  if (!prev_) throw InputError("adjust_time_2: missing previous field");
  const std::size_t d = prev_->base_dim();
  if (f_.dim != d || h_.dim != d || b_.dim != d || c_.dim != d) {
    throw InputError("adjust_time_2: dimension mismatch");
  }
}

std::shared_ptr<const AdjustTime2Field::Column> AdjustTime2Field::column(
    std::span<const double> p, bool with_gradient) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (memo_ && (memo_->has_gradient || !with_gradient) &&
        std::equal(p.begin(), p.end(), memo_->p.begin(), memo_->p.end())) {
      return memo_;
    }
  }
  // Computed outside the lock; concurrent callers may duplicate the work.
  auto fresh = std::make_shared<Column>();
  Column& col = *fresh;
  col.p.assign(p.begin(), p.end());
  col.f = f_(p);
  col.h = h_(p);
  col.b = b_(p);
  col.c = c_(p);
  require_ordered({col.f, col.h, col.b, col.c}, "adjust_time_2");
  const auto r = quad::integrate([&](double x) { return 1.0 / prev_->velocity(p, x); }, col.f,
                                 col.h, kTauRelTol, 1e-15);
  if (!r.converged) throw ToleranceFailure("adjust_time_2: tau quadrature failed", r.value);
  col.tau = r.value;
  if (with_gradient) {
    const std::size_t d = p.size();
    col.has_gradient = true;
    col.df.resize(d);
    col.dh.resize(d);
    col.db.resize(d);
    col.dc.resize(d);
    col.dtau.resize(d);
    f_.gradient(p, col.df);
    h_.gradient(p, col.dh);
    b_.gradient(p, col.db);
    c_.gradient(p, col.dc);
    // d/dp of int_f^h dx / v': endpoint terms minus int (d_p v') / v'^2.
    const double vf = prev_->velocity(p, col.f), vh = prev_->velocity(p, col.h);
    std::vector<double> dv(d);
    for (std::size_t j = 0; j < d; ++j) {
      const auto inner = quad::integrate(
          [&](double x) {
            double vx = 0.0;
            const double v = prev_->velocity_partials(p, x, vx, dv);
            return dv[j] / (v * v);
          },
          col.f, col.h, kTauRelTol, 1e-15);
      col.dtau[j] = col.dh[j] / vh - col.df[j] / vf - inner.value;
    }
  }
  std::lock_guard<std::mutex> lock(mutex_);
  memo_ = fresh;
  return fresh;
}

double AdjustTime2Field::tau(std::span<const double> p) const { return column(p, false)->tau; }

double AdjustTime2Field::velocity(std::span<const double> p, double x) const {
  const auto col = column(p, false);
  if (x >= col->c) return 1.0;
  if (x > col->b) return bridge_velocity(col->b, col->c, col->tau, x);
  return prev_->velocity(p, x);
}

double AdjustTime2Field::velocity_partials(std::span<const double> p, double x, double& dx,
                                           std::span<double> dp) const {
  const auto colp = column(p, true);
  const Column& col = *colp;
  if (x >= col.c) {
    dx = 0.0;
    std::fill(dp.begin(), dp.end(), 0.0);
    return 1.0;
  }
  if (x > col.b) {
    const BridgePartials u = bridge_velocity_partials(col.b, col.c, col.tau, x);
    dx = u.dx;
    for (std::size_t j = 0; j < p.size(); ++j) {
      dp[j] = u.da * col.db[j] + u.db * col.dc[j] + u.dtau * col.dtau[j];
    }
    return u.value;
  }
  return prev_->velocity_partials(p, x, dx, dp);
}

// -- final cutoff ---------------------------------------------------------------------

CutoffField::CutoffField(FieldPtr inner, SmoothFunction f) : inner_(std::move(inner)), f_(std::move(f)) {
  if (!inner_ || inner_->base_dim() != f_.dim) throw InputError("cutoff: dimension mismatch");
}

double CutoffField::velocity(std::span<const double> p, double x) const {
  const double f = f_(p);
  const Jet chi = smooth_transition(2.0 * x / f - 1.0);
  if (chi.value == 0.0) return 0.0;
  return chi.value * inner_->velocity(p, x);
}

double CutoffField::velocity_partials(std::span<const double> p, double x, double& dx,
                                      std::span<double> dp) const {
  const ValueGrad f = eval_with_gradient(f_, p);
  const Jet chi = smooth_transition(2.0 * x / f.value - 1.0);
  if (chi.value == 0.0) {
    dx = 0.0;
    std::fill(dp.begin(), dp.end(), 0.0);
    return 0.0;
  }
  double vx = 0.0;
  const double v = inner_->velocity_partials(p, x, vx, dp);
  const double chi_x = chi.deriv * 2.0 / f.value;
  const double chi_f = -chi.deriv * 2.0 * x / (f.value * f.value);
  dx = chi_x * v + chi.value * vx;
  for (std::size_t j = 0; j < p.size(); ++j) dp[j] = chi_f * f.grad[j] * v + chi.value * dp[j];
  return chi.value * v;
}

// -- glued field ------------------------------------------------------------------------

GluedField::GluedField(LscSpec spec, LscOptions options) : spec_(std::move(spec)) {
  spec_.validate();
  const std::size_t n_max = options.depth;
  if (n_max < 2) throw InputError("lsc field needs depth >= 2");
  baire_ = baire_sequence(spec_, n_max + 1);
  const auto& lo = spec_.base_lo;
  const auto& hi = spec_.base_hi;
  const auto& f = baire_.levels;  // f[k] = f_{k+1}
  g_.push_back(smooth_majorant({blend_bound(f[0])}, 0.0, lo, hi, options.majorant_half));
  for (std::size_t n = 1; n <= n_max; ++n) {
    g_.push_back(smooth_majorant({blend_bound(g_[n - 1]), blend_bound(f[n])}, 1.0 - 1.0 / n, lo,
                                 hi, options.majorant_half));
  }
  levels_.push_back(std::make_shared<AdjustTime1Field>(this->f(1), g(0), g(1)));
  for (std::size_t n = 2; n <= n_max; ++n) {
    levels_.push_back(std::make_shared<AdjustTime2Field>(levels_.back(), this->f(n - 1),
                                                         this->f(n), g(n - 1), g(n)));
  }
  final_ = std::make_shared<CutoffField>(levels_.back(), this->f(1));
}

SmoothFunction GluedField::f(std::size_t n) const { return baire_.function(n); }

SmoothFunction GluedField::g(std::size_t n) const {
  if (n >= g_.size()) throw InputError("majorant level out of range");
  return g_[n]->as_function(g_[n]);
}

FieldPtr GluedField::level(std::size_t n) const {
  if (n < 1 || n > levels_.size()) throw InputError("lsc level out of range");
  return levels_[n - 1];
}

double GluedField::velocity_limit(std::span<const double> p, double x) const {
  if (x >= g_.back()->value(p)) {
    std::ostringstream os;
    os << "x = " << x << " lies above g_" << depth() << "(p); build more levels";
    throw DepthExhausted(os.str());
  }
  return final_->velocity(p, x);
}

LimitVerdict GluedField::classify_limit(std::span<const double> p, double x) const {
  for (std::size_t n = 1; n <= depth(); ++n) {
    if (x < baire_.levels[n - 1]->value(p)) return LimitVerdict::Survives;
  }
  return LimitVerdict::ExcisedAtDepth;
}

std::shared_ptr<const GluedField> build_lsc_field(const LscSpec& spec, LscOptions options) {
  return std::make_shared<const GluedField>(spec, options);
}

}  // namespace excision
