#pragma once
// Fields whose time-1 flow removes the epigraph of a lower semi-continuous
// function lambda : B -> (0, 1]. lambda is approached from below by smooth
// f_n, each level adds one bridge surgery in a band (g_{n-1}, g_n) just below
// x = 1, and the glued limit field has T <= 1 exactly above the graph.
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "excision/bump_blend.hpp"
#include "excision/null_fields.hpp"

namespace excision {

struct LscPiece {
  std::vector<double> lo, hi;  // closed box; lo == hi gives a point
  double value;                // in (0, 1]
};

/// lambda(p) = min(1, values of the pieces containing p) on a bounded box.
struct LscSpec {
  std::vector<double> base_lo, base_hi;
  std::vector<LscPiece> pieces;

  void validate() const;
  std::size_t dim() const { return base_lo.size(); }
  double lambda(std::span<const double> p) const;
  /// Exact infimum of lambda over the ball B(c, r).
  double inf_over_ball(std::span<const double> c, double r) const;
  /// Does lambda fail to be constant on B(c, r)?
  bool straddles(std::span<const double> c, double r) const;
};

/// Box with a tail on B = R^2, moved into (0, 1]: 1/4 at the origin, 1/2 on
/// the rest of [-1, 1]^2, 1 elsewhere; base region [-1.5, 1.5]^2.
LscSpec box_tail_spec();

struct BaireSequence {
  /// levels[k] is lambda_{k+1}.
  std::vector<std::shared_ptr<const BumpBlend>> levels;
  std::vector<double> cover_radius;  // max bump radius used at each level

  std::size_t size() const { return levels.size(); }
  SmoothFunction function(std::size_t n) const;  // lambda_n, n >= 1
};

/// Strictly increasing smooth lambda_1 < lambda_2 < ... < lambda with
/// lambda_n >= (1 - 1/n) inf over 1/n-balls.
BaireSequence baire_sequence(const LscSpec& spec, std::size_t count);

/// Upper bound of some function over a closed ball.
using BallBound = std::function<double(std::span<const double> center, double radius)>;

BallBound blend_bound(std::shared_ptr<const BumpBlend> f);
/// Sampled supremum plus a Lipschitz allowance; for generic smooth inputs.
BallBound sampled_bound(SmoothFunction f);

/// Smooth g with f < g < 1, the blend of constants (1 + bound)/2 on cells of
/// half-width `half`. `bounds` are combined by max together with `floor`.
std::shared_ptr<const BumpBlend> smooth_majorant(const std::vector<BallBound>& bounds,
                                                 double floor, std::vector<double> lo,
                                                 std::vector<double> hi, double half = 0.05);

/// v(p, x) = bridge_velocity(a(p), b(p), f(p); x) on B x (0, 1). Requires
/// 0 < f < a < b < 1; T <= 1 exactly for x >= f(p).
class AdjustTime1Field : public VectorFieldPX {
 public:
  AdjustTime1Field(SmoothFunction f, SmoothFunction a, SmoothFunction b);
  std::size_t base_dim() const override { return f_.dim; }
  double x_lo() const override { return 0.0; }
  double x_hi() const override { return 1.0; }
  double velocity(std::span<const double> p, double x) const override;
  double velocity_partials(std::span<const double> p, double x, double& dx,
                           std::span<double> dp) const override;

 private:
  struct Column {
    std::vector<double> p;
    double f, a, b;
    bool has_gradient = false;
    std::vector<double> df, da, db;
  };
  std::shared_ptr<const Column> column(std::span<const double> p, bool with_gradient) const;

  SmoothFunction f_, a_, b_;
  mutable std::mutex mutex_;
  mutable std::shared_ptr<const Column> memo_;
};

/// Given X' with T_{X'} <= 1 iff x >= f and v' = 1 above b: keeps v' below b,
/// inserts a bridge over (b, c) that adds tau(p) = int_f^h dx / v', and is 1
/// above c. Then T <= 1 iff x >= h.
class AdjustTime2Field : public VectorFieldPX {
 public:
  AdjustTime2Field(FieldPtr prev, SmoothFunction f, SmoothFunction h, SmoothFunction b,
                   SmoothFunction c);
  std::size_t base_dim() const override { return f_.dim; }
  double x_lo() const override { return 0.0; }
  double x_hi() const override { return 1.0; }
  double velocity(std::span<const double> p, double x) const override;
  double velocity_partials(std::span<const double> p, double x, double& dx,
                           std::span<double> dp) const override;

  double tau(std::span<const double> p) const;
  const FieldPtr& previous() const { return prev_; }

 private:
  struct Column {
    std::vector<double> p;
    double f, h, b, c, tau;
    bool has_gradient = false;
    std::vector<double> df, dh, db, dc, dtau;
  };
  // Memo of the last base point. Entries are immutable once published.
  std::shared_ptr<const Column> column(std::span<const double> p, bool with_gradient) const;

  FieldPtr prev_;
  SmoothFunction f_, h_, b_, c_;
  mutable std::mutex mutex_;
  mutable std::shared_ptr<const Column> memo_;
};

/// chi(p, x) v(p, x) with chi = 0 for x <= f(p)/2 and 1 for x >= f(p).
class CutoffField : public VectorFieldPX {
 public:
  CutoffField(FieldPtr inner, SmoothFunction f);
  std::size_t base_dim() const override { return inner_->base_dim(); }
  double x_lo() const override { return 0.0; }
  double x_hi() const override { return 1.0; }
  double velocity(std::span<const double> p, double x) const override;
  double velocity_partials(std::span<const double> p, double x, double& dx,
                           std::span<double> dp) const override;

 private:
  FieldPtr inner_;
  SmoothFunction f_;
};

struct LscOptions {
  std::size_t depth = 12;
  double majorant_half = 0.05;
};

enum class LimitVerdict { Survives, ExcisedAtDepth };

class GluedField {
 public:
  GluedField(LscSpec spec, LscOptions options);

  std::size_t depth() const { return levels_.size(); }
  const LscSpec& spec() const { return spec_; }
  const BaireSequence& baire() const { return baire_; }
  /// f_n (n = 1..depth+1) and g_n (n = 0..depth).
  SmoothFunction f(std::size_t n) const;
  SmoothFunction g(std::size_t n) const;
  /// X_n without the final cutoff, n = 1..depth.
  FieldPtr level(std::size_t n) const;
  /// chi * v_depth: the field the Hamiltonian is built from.
  FieldPtr field() const { return final_; }
  /// v_infinity; throws DepthExhausted when x >= g_depth(p).
  double velocity_limit(std::span<const double> p, double x) const;
  /// Survives iff x < f_n(p) for some built n; the limit field then has
  /// T > 1. Otherwise the point is excised as far as the built depth can tell.
  LimitVerdict classify_limit(std::span<const double> p, double x) const;

 private:
  LscSpec spec_;
  BaireSequence baire_;
  std::vector<std::shared_ptr<const BumpBlend>> g_;
  std::vector<FieldPtr> levels_;
  FieldPtr final_;
};

std::shared_ptr<const GluedField> build_lsc_field(const LscSpec& spec, LscOptions options = {});

}  // namespace excision
