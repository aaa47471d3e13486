#pragma once
// Hamiltonians on the flat model M = B x I x R with coordinates
// z = (x1, y1, ..., xn, yn), where (x_n, y_n) = (x, y) and the first 2n-2
// entries are the base point p. omega = sum dx_i ^ dy_i and X_F is defined by
// X_F _| omega = dF, so x_i' = dF/dy_i and y_i' = -dF/dx_i.
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "excision/null_fields.hpp"

namespace excision {

class HamiltonianField {
 public:
  virtual ~HamiltonianField() = default;

  /// Phase-space dimension 2n.
  virtual std::size_t dim() const = 0;
  /// The chart bounds the coordinate z[dim-2] to (chart_lo, chart_hi).
  virtual double chart_lo() const = 0;
  virtual double chart_hi() const = 0;

  virtual double value(std::span<const double> z) const = 0;
  virtual double value_and_gradient(std::span<const double> z, std::span<double> grad) const = 0;

  std::size_t chart_axis() const { return dim() - 2; }
  /// Distance of z to the chart boundary along the bounded axis.
  double chart_margin(std::span<const double> z) const;
  /// X_F(z); returns F(z).
  double vector_field(std::span<const double> z, std::span<double> out) const;
};

using HamiltonianPtr = std::shared_ptr<const HamiltonianField>;

/// The closed set Z in N = {y = 0}: a membership test on (p, x) and sample
/// points used to certify properties of a construction on Z.
struct ExcisionTarget {
  std::function<bool(std::span<const double> p, double x)> contains;
  std::vector<std::vector<double>> samples;  // each entry is (p..., x)
};

/// Positive function with bounded superlevel sets, with gradient.
struct Witness {
  std::function<double(std::span<const double> z, std::span<double> grad)> eval;
};

/// 1 / (1 + |w|^2) at the ambient point w obtained from z by the cotangent
/// lift of t -> t/(1 - t^2) on the bounded axis (after the affine map of
/// (lo, hi) onto (-1, 1)); other coordinates are taken as they are.
Witness model_witness(double lo, double hi);

struct ExtensionOptions {
  double min_speed_on_target = 1e-3;
  std::size_t certificate_samples = 10000;
};

/// F = chi H with H(p, x, y) = y v(p, x) and
/// chi = theta(v) * sigma((H / H1)^2): theta is a flat step from 0 at
/// v_floor/2 to 1 at v_floor, sigma a flat step from 1 at 1/16 down to 0 at
/// 1/4. Hence chi = 1 on Z and |F| <= H1 / 2.
class NullExtensionHamiltonian : public HamiltonianField {
 public:
  NullExtensionHamiltonian(FieldPtr field, double v_floor, Witness h1);

  std::size_t dim() const override { return field_->base_dim() + 2; }
  double chart_lo() const override { return field_->x_lo(); }
  double chart_hi() const override { return field_->x_hi(); }
  double value(std::span<const double> z) const override;
  double value_and_gradient(std::span<const double> z, std::span<double> grad) const override;

  double v_floor() const { return v_floor_; }
  const FieldPtr& field() const { return field_; }
  /// The cutoff chi at z (for diagnostics and tests).
  double cutoff(std::span<const double> z) const;

 private:
  FieldPtr field_;
  double v_floor_;
  Witness h1_;
};

/// Certifies min v over the target samples > options.min_speed_on_target
/// and takes half that minimum as v_floor.
std::shared_ptr<const NullExtensionHamiltonian> extend_null_field(
    FieldPtr field, const ExcisionTarget& Z, ExtensionOptions options = {});
std::shared_ptr<const NullExtensionHamiltonian> extend_null_field(FieldPtr field,
                                                                  const ExcisionTarget& Z,
                                                                  Witness h1,
                                                                  ExtensionOptions options);

/// F = (1 - x^2) / (|p|^2 + 1 - x^2) * chi * y on R^{2n-2} x (-1, 1) x R with
/// chi = rho(s_x(x) s_r(r)), r = (|p|^2 + y^2) / h(x). s_x rises from 0 at
/// -eps to 1 at -eps/2; s_r is 1 for r <= 1/4 and 0 for r >= 1/2.
class RayHamiltonian : public HamiltonianField {
 public:
  RayHamiltonian(std::size_t n, double eps, ScalarField1D h);

  std::size_t dim() const override { return 2 * n_; }
  double chart_lo() const override { return -1.0; }
  double chart_hi() const override { return 1.0; }
  double value(std::span<const double> z) const override;
  double value_and_gradient(std::span<const double> z, std::span<double> grad) const override;

  double cutoff(std::span<const double> z) const;
  double eps() const { return eps_; }
  const ScalarField1D& h() const { return h_; }

 private:
  std::size_t n_;
  double eps_;
  ScalarField1D h_;
};

/// h(x) = delta_h (1 - x).
ScalarField1D linear_profile(double delta_h);

std::shared_ptr<const RayHamiltonian> build_ray_hamiltonian(std::size_t n, double eps = 0.5,
                                                            double delta_h = 0.25);
std::shared_ptr<const RayHamiltonian> build_ray_hamiltonian_n1(double eps = 0.5);
std::shared_ptr<const RayHamiltonian> build_ray_hamiltonian_n1(double eps, ScalarField1D h);

/// Axis-aligned neighbourhood: the bump is 1 on [inner_lo, inner_hi] and 0
/// outside (outer_lo, outer_hi); infinite bounds leave an axis unconstrained.
struct NeighbourhoodSpec {
  std::vector<double> inner_lo, inner_hi, outer_lo, outer_hi;

  double bump(std::span<const double> z, std::span<double> grad) const;
  bool in_inner(std::span<const double> z) const;
  bool outside(std::span<const double> z) const;
};

class LocalizedHamiltonian : public HamiltonianField {
 public:
  LocalizedHamiltonian(HamiltonianPtr inner, NeighbourhoodSpec U);

  std::size_t dim() const override { return inner_->dim(); }
  double chart_lo() const override { return inner_->chart_lo(); }
  double chart_hi() const override { return inner_->chart_hi(); }
  double value(std::span<const double> z) const override;
  double value_and_gradient(std::span<const double> z, std::span<double> grad) const override;

  const NeighbourhoodSpec& neighbourhood() const { return U_; }
  const HamiltonianPtr& inner() const { return inner_; }

 private:
  HamiltonianPtr inner_;
  NeighbourhoodSpec U_;
};

/// F' = bump_U F. Every target sample (embedded at y = 0) must lie in the
/// inner box of U.
std::shared_ptr<const LocalizedHamiltonian> localize(HamiltonianPtr F, NeighbourhoodSpec U,
                                                     const ExcisionTarget& Z);

}  // namespace excision
