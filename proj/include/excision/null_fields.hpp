#pragma once
// Null vector fields v(p, x) d/dx on B x I. The time-1 flow of such a field
// freezes p and moves x along the fiber field v(p, .); the points whose
// forward time is <= 1 are the ones it removes.
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "excision/flow1d.hpp"
#include "excision/scalar_kit.hpp"

namespace excision {

/// Smooth real function on B = R^dim with gradient.
struct SmoothFunction {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;

  double operator()(std::span<const double> p) const { return value(p); }
  static SmoothFunction constant(std::size_t dim, double c);
  /// c0 + <g, p>.
  static SmoothFunction affine(double c0, std::vector<double> g);
};

class VectorFieldPX {
 public:
  virtual ~VectorFieldPX() = default;

  virtual std::size_t base_dim() const = 0;
  /// Open interval I carrying the x coordinate.
  virtual double x_lo() const = 0;
  virtual double x_hi() const = 0;

  virtual double velocity(std::span<const double> p, double x) const = 0;
  /// Returns v and writes dv/dx and the p-gradient (size base_dim).
  virtual double velocity_partials(std::span<const double> p, double x, double& dx,
                                   std::span<double> dp) const = 0;

  /// v(p, .) as a one-variable field.
  virtual ScalarField1D fiber(std::span<const double> p) const;
  virtual TimeOfFlight forward_time(std::span<const double> p, double x) const;
  virtual TimeOfFlight backward_time(std::span<const double> p, double x) const;
};

using FieldPtr = std::shared_ptr<const VectorFieldPX>;

struct EpigraphSpec {
  ClosedSetSpec C;
  SmoothFunction lambda;  // values in (-1, 1]
};

/// v(p, x) = u(a(p), b(p), c(p); x) with b = lambda, a = (b - 1)/2 and c the
/// zero-locus function of C.
class EpigraphField : public VectorFieldPX {
 public:
  explicit EpigraphField(EpigraphSpec spec);

  struct Params {
    double a, b, c;
  };
  Params params(std::span<const double> p) const;

  std::size_t base_dim() const override { return spec_.C.dim(); }
  double x_lo() const override { return -1.0; }
  double x_hi() const override { return 1.0; }
  double velocity(std::span<const double> p, double x) const override;
  double velocity_partials(std::span<const double> p, double x, double& dx,
                           std::span<double> dp) const override;
  ScalarField1D fiber(std::span<const double> p) const override;
  const EpigraphSpec& spec() const { return spec_; }

 private:
  EpigraphSpec spec_;
  ZeroLocusFunction c_;
};

std::shared_ptr<const EpigraphField> build_epigraph_field(const EpigraphSpec& spec);

enum class Verdict { Excised, Survives };

/// Excised iff T_v(p, x) <= 1, from the closed-form time of the u family.
Verdict classify_epigraph(const EpigraphField& field, std::span<const double> p, double x);

/// Time-1 flow with p frozen. Throws ExcisedPointError when T_v(p, x) <= 1.
double presympl_time1(const VectorFieldPX& field, std::span<const double> p, double x);
/// Time -1 flow (always defined when backward times are -inf).
double presympl_time_minus1(const VectorFieldPX& field, std::span<const double> p, double x);

}  // namespace excision
