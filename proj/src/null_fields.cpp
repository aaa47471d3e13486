#include "excision/null_fields.hpp"

#include <algorithm>
#include <cmath>

#include "excision/errors.hpp"

namespace excision {

SmoothFunction SmoothFunction::constant(std::size_t dim, double c) {
  return {dim, [c](std::span<const double>) { return c; },
          [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); }};
}

SmoothFunction SmoothFunction::affine(double c0, std::vector<double> g) {
  const std::size_t dim = g.size();
  return {dim,
          [c0, g](std::span<const double> p) {
            double v = c0;
            for (std::size_t j = 0; j < g.size(); ++j) v += g[j] * p[j];
            return v;
          },
          [g](std::span<const double>, std::span<double> out) {
            std::copy(g.begin(), g.end(), out.begin());
          }};
}

ScalarField1D VectorFieldPX::fiber(std::span<const double> p) const {
  std::vector<double> q(p.begin(), p.end());
  ScalarField1D f;
  f.eval = [this, q](double x) { return velocity(q, x); };
  f.deriv = [this, q](double x) {
    double dx = 0.0;
    std::vector<double> dp(q.size());
    velocity_partials(q, x, dx, dp);
    return dx;
  };
  f.lo = x_lo();
  f.hi = x_hi();
  return f;
}

TimeOfFlight VectorFieldPX::forward_time(std::span<const double> p, double x) const {
  return excision::forward_time(fiber(p), x);
}

TimeOfFlight VectorFieldPX::backward_time(std::span<const double> p, double x) const {
  return excision::backward_time(fiber(p), x);
}

EpigraphField::EpigraphField(EpigraphSpec spec) : spec_(std::move(spec)), c_(spec_.C) {
  if (spec_.lambda.dim != spec_.C.dim()) {
    throw InputError("epigraph: lambda and C live on bases of different dimension");
  }
  if (!spec_.lambda.value || !spec_.lambda.gradient) {
    throw InputError("epigraph: lambda needs a value and a gradient");
  }
}

EpigraphField::Params EpigraphField::params(std::span<const double> p) const {
  if (p.size() != base_dim()) throw InputError("epigraph: base point has the wrong dimension");
  const double b = spec_.lambda(p);
  if (!(b > -1.0 && b <= 1.0)) throw InputError("epigraph: lambda leaves (-1, 1]");
  return {0.5 * (b - 1.0), b, c_.value(p)};
}

double EpigraphField::velocity(std::span<const double> p, double x) const {
  const Params k = params(p);
  return model_velocity_u(k.a, k.b, k.c, x);
}

double EpigraphField::velocity_partials(std::span<const double> p, double x, double& dx,
                                        std::span<double> dp) const {
  const Params k = params(p);
  const UPartials u = model_velocity_u_partials(k.a, k.b, k.c, x);
  dx = u.dx;
  std::vector<double> gl(p.size()), gc(p.size());
  spec_.lambda.gradient(p, gl);
  c_.value_and_gradient(p, gc);
  for (std::size_t j = 0; j < p.size(); ++j) {
    dp[j] = u.da * 0.5 * gl[j] + u.db * gl[j] + u.dc * gc[j];
  }
  return u.value;
}

ScalarField1D EpigraphField::fiber(std::span<const double> p) const {
  const Params k = params(p);
  return make_u_field(k.a, k.b, k.c);
}

std::shared_ptr<const EpigraphField> build_epigraph_field(const EpigraphSpec& spec) {
  return std::make_shared<const EpigraphField>(spec);
}

Verdict classify_epigraph(const EpigraphField& field, std::span<const double> p, double x) {
  const auto k = field.params(p);
  return closed_form_Tu(k.a, k.b, k.c, x).value <= 1.0 ? Verdict::Excised : Verdict::Survives;
}

double presympl_time1(const VectorFieldPX& field, std::span<const double> p, double x) {
  const TimeOfFlight T = field.forward_time(p, x);
  if (T.value <= 1.0) throw ExcisedPointError("point is removed by the time-1 flow");
  return flow_map(field.fiber(p), 1.0, x);
}

double presympl_time_minus1(const VectorFieldPX& field, std::span<const double> p, double x) {
  return flow_map(field.fiber(p), -1.0, x);
}

}  // namespace excision
