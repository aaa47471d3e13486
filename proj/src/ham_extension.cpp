#include "excision/ham_extension.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "excision/errors.hpp"

namespace excision {

double HamiltonianField::chart_margin(std::span<const double> z) const {
  const double x = z[chart_axis()];
  return std::min(x - chart_lo(), chart_hi() - x);
}

double HamiltonianField::vector_field(std::span<const double> z, std::span<double> out) const {
  std::vector<double> g(dim());
  const double F = value_and_gradient(z, g);
  for (std::size_t i = 0; i + 1 < dim(); i += 2) {
    out[i] = g[i + 1];
    out[i + 1] = -g[i];
  }
  return F;
}

// -- witness ------------------------------------------------------------------

Witness model_witness(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InputError("model_witness: bounded interval required");
  }
  const double scale = 2.0 / (hi - lo);
  return {[=](std::span<const double> z, std::span<double> grad) {
    const std::size_t n = z.size();
    const std::size_t ax = n - 2;
    const double t = scale * (z[ax] - lo) - 1.0;
    const double y = z[ax + 1];
    const double m = 1.0 - t * t;
    if (!(m > 0.0)) {
      std::fill(grad.begin(), grad.end(), 0.0);
      return 0.0;
    }
    // G = g(t(x)); G' = g'(t) s, G'' = g''(t) s^2.
    const double G = t / m;
    const double G1 = (1.0 + t * t) / (m * m) * scale;
    const double G2 = 2.0 * t * (3.0 + t * t) / (m * m * m) * scale * scale;
    const double Y = y / G1;
    double Q = G * G + Y * Y;
    for (std::size_t i = 0; i < ax; ++i) Q += z[i] * z[i];
    const double w = 1.0 / (1.0 + Q);
    const double dwdQ = -w * w;
    for (std::size_t i = 0; i < ax; ++i) grad[i] = dwdQ * 2.0 * z[i];
    grad[ax] = dwdQ * (2.0 * G * G1 - 2.0 * Y * Y * G2 / G1);
    grad[ax + 1] = dwdQ * 2.0 * Y / G1;
    return w;
  }};
}

// -- extension of a null field ------------------------------------------------

namespace {

constexpr double kSigmaLo = 1.0 / 16.0;
constexpr double kSigmaHi = 1.0 / 4.0;

}  // namespace

NullExtensionHamiltonian::NullExtensionHamiltonian(FieldPtr field, double v_floor, Witness h1)
    : field_(std::move(field)), v_floor_(v_floor), h1_(std::move(h1)) {
  if (!field_) throw InputError("extension: null field");
  if (field_->base_dim() % 2 != 0) throw InputError("extension: base must be even-dimensional");
  if (!(v_floor_ > 0.0)) throw InputError("extension: v_floor must be positive");
}

double NullExtensionHamiltonian::cutoff(std::span<const double> z) const {
  const std::size_t bd = field_->base_dim();
  const double v = field_->velocity(z.first(bd), z[bd]);
  const double half = 0.5 * v_floor_;
  const double theta = smooth_transition((v - half) / half).value;
  if (theta == 0.0) return 0.0;
  std::vector<double> g(dim());
  const double q = z[bd + 1] * v / h1_.eval(z, g);
  return theta * (1.0 - smooth_transition((q * q - kSigmaLo) / (kSigmaHi - kSigmaLo)).value);
}

double NullExtensionHamiltonian::value(std::span<const double> z) const {
  const std::size_t bd = field_->base_dim();
  const double y = z[bd + 1];
  if (y == 0.0) return 0.0;
  return cutoff(z) * y * field_->velocity(z.first(bd), z[bd]);
}

double NullExtensionHamiltonian::value_and_gradient(std::span<const double> z,
                                                    std::span<double> grad) const {
  const std::size_t bd = field_->base_dim();
  const std::size_t n = bd + 2;
  std::fill(grad.begin(), grad.begin() + n, 0.0);
  const auto p = z.first(bd);
  const double x = z[bd], y = z[bd + 1];
  const double half = 0.5 * v_floor_;

  if (y == 0.0) {
    // On N only dF/dy = chi v survives, and chi = theta(v) there.
    const double v = field_->velocity(p, x);
    grad[bd + 1] = smooth_transition((v - half) / half).value * v;
    return 0.0;
  }

  std::vector<double> dv(n, 0.0);  // gradient of v in (p, x); zero in y
  const double v = field_->velocity_partials(p, x, dv[bd], std::span<double>(dv).first(bd));
  const Jet theta = smooth_transition((v - half) / half);
  if (theta.value == 0.0) return 0.0;

  std::vector<double> dh(n);
  const double h1 = h1_.eval(z, dh);
  const double H = y * v;
  const double q = H / h1;
  const Jet step = smooth_transition((q * q - kSigmaLo) / (kSigmaHi - kSigmaLo));
  const double sigma = 1.0 - step.value;
  if (sigma == 0.0) return 0.0;
  const double dsigma_dt = -step.deriv / (kSigmaHi - kSigmaLo);

  std::vector<double> dH(n);
  for (std::size_t i = 0; i <= bd; ++i) dH[i] = y * dv[i];
  dH[bd + 1] = v;

  const double chi = theta.value * sigma;
  const double dtheta_dv = theta.deriv / half;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = 2.0 * q * (dH[i] / h1 - H * dh[i] / (h1 * h1));
    const double dchi = dtheta_dv * dv[i] * sigma + theta.value * dsigma_dt * dt;
    grad[i] = chi * dH[i] + H * dchi;
  }
  return chi * H;
}

std::shared_ptr<const NullExtensionHamiltonian> extend_null_field(FieldPtr field,
                                                                  const ExcisionTarget& Z,
                                                                  Witness h1,
                                                                  ExtensionOptions options) {
  if (!field) throw InputError("extension: null field");
  if (Z.samples.empty()) throw InputError("extension: target has no samples");
  const std::size_t bd = field->base_dim();
  const std::size_t count = std::min(Z.samples.size(), options.certificate_samples);
  double vmin = kInf;
  for (std::size_t i = 0; i < count; ++i) {
    // Spread the certificate over the whole sample list.
    const auto& s = Z.samples[i * Z.samples.size() / count];
    if (s.size() != bd + 1) throw InputError("extension: target sample has wrong dimension");
    vmin = std::min(vmin, field->velocity(std::span<const double>(s).first(bd), s[bd]));
  }
  if (!(vmin > options.min_speed_on_target)) {
    std::ostringstream os;
    os << "extension: sampled speed on the target " << vmin << " does not exceed "
       << options.min_speed_on_target;
    throw InputError(os.str());
  }
  return std::make_shared<NullExtensionHamiltonian>(std::move(field), 0.5 * vmin, std::move(h1));
}

std::shared_ptr<const NullExtensionHamiltonian> extend_null_field(FieldPtr field,
                                                                  const ExcisionTarget& Z,
                                                                  ExtensionOptions options) {
  if (!field) throw InputError("extension: null field");
  Witness h1 = model_witness(field->x_lo(), field->x_hi());
  return extend_null_field(std::move(field), Z, std::move(h1), options);
}

// -- the ray ------------------------------------------------------------------

RayHamiltonian::RayHamiltonian(std::size_t n, double eps, ScalarField1D h)
    : n_(n), eps_(eps), h_(std::move(h)) {
  if (n_ < 1) throw InputError("ray: n must be at least 1");
  if (!(eps_ > 0.0 && eps_ < 1.0)) throw InputError("ray: eps must lie in (0, 1)");
  if (!h_.eval || !h_.deriv) throw InputError("ray: profile h needs value and derivative");
}

double RayHamiltonian::cutoff(std::span<const double> z) const {
  const std::size_t ax = 2 * n_ - 2;
  const double x = z[ax], y = z[ax + 1];
  const double sx = smooth_transition((x + eps_) / (0.5 * eps_)).value;
  if (sx == 0.0) return 0.0;
  double P = 0.0;
  for (std::size_t i = 0; i < ax; ++i) P += z[i] * z[i];
  const double r = (P + y * y) / h_.eval(x);
  const double sr = 1.0 - smooth_transition(4.0 * r - 1.0).value;
  return smoothstep_rho(sx * sr);
}

double RayHamiltonian::value(std::span<const double> z) const {
  const std::size_t ax = 2 * n_ - 2;
  const double x = z[ax], y = z[ax + 1];
  if (y == 0.0) return 0.0;
  double P = 0.0;
  for (std::size_t i = 0; i < ax; ++i) P += z[i] * z[i];
  const double m = 1.0 - x * x;
  return m / (P + m) * cutoff(z) * y;
}

double RayHamiltonian::value_and_gradient(std::span<const double> z,
                                          std::span<double> grad) const {
  const std::size_t ax = 2 * n_ - 2;
  std::fill(grad.begin(), grad.begin() + dim(), 0.0);
  const double x = z[ax], y = z[ax + 1];
  const Jet sx = smooth_transition((x + eps_) / (0.5 * eps_));
  if (sx.value == 0.0) return 0.0;
  double P = 0.0;
  for (std::size_t i = 0; i < ax; ++i) P += z[i] * z[i];
  const double h = h_.eval(x);
  const double r = (P + y * y) / h;
  const Jet step = smooth_transition(4.0 * r - 1.0);
  const double sr = 1.0 - step.value;
  if (sr == 0.0) return 0.0;
  const double sr_r = -4.0 * step.deriv;
  const double S = sx.value * sr;
  const double chi = smoothstep_rho(S);
  const double rho1 = smoothstep_rho_deriv(S);

  const double m = 1.0 - x * x;
  const double den = P + m;
  const double A = m / den;
  const double dA_dP = -m / (den * den);
  const double dA_dx = -2.0 * x * P / (den * den);

  const double dchi_dr = rho1 * sx.value * sr_r;
  const double dr_dx = -(P + y * y) * h_.deriv(x) / (h * h);
  const double dchi_dx = rho1 * (sx.deriv / (0.5 * eps_) * sr + sx.value * sr_r * dr_dx);

  for (std::size_t i = 0; i < ax; ++i) {
    const double dchi = dchi_dr * 2.0 * z[i] / h;
    grad[i] = y * (dA_dP * 2.0 * z[i] * chi + A * dchi);
  }
  grad[ax] = y * (dA_dx * chi + A * dchi_dx);
  grad[ax + 1] = A * chi + A * y * dchi_dr * 2.0 * y / h;
  return A * chi * y;
}

ScalarField1D linear_profile(double delta_h) {
  if (!(delta_h > 0.0)) throw InputError("ray: delta_h must be positive");
  ScalarField1D h;
  h.eval = [delta_h](double x) { return delta_h * (1.0 - x); };
  h.deriv = [delta_h](double) { return -delta_h; };
  h.lo = -1.0;
  h.hi = 1.0;
  return h;
}

std::shared_ptr<const RayHamiltonian> build_ray_hamiltonian(std::size_t n, double eps,
                                                            double delta_h) {
  if (n < 2) throw InputError("ray: use the n = 1 builder for the plane");
  return std::make_shared<RayHamiltonian>(n, eps, linear_profile(delta_h));
}

std::shared_ptr<const RayHamiltonian> build_ray_hamiltonian_n1(double eps) {
  return std::make_shared<RayHamiltonian>(1, eps, linear_profile(0.25));
}

std::shared_ptr<const RayHamiltonian> build_ray_hamiltonian_n1(double eps, ScalarField1D h) {
  return std::make_shared<RayHamiltonian>(1, eps, std::move(h));
}

// -- localization -------------------------------------------------------------

namespace {

// 1 on [ilo, ihi], 0 outside (olo, ohi); either side may be infinite.
Jet window(double s, double olo, double ilo, double ihi, double ohi) {
  double value = 1.0, deriv = 0.0;
  if (std::isfinite(ilo)) {
    const Jet a = smooth_transition((s - olo) / (ilo - olo));
    value = a.value;
    deriv = a.deriv / (ilo - olo);
  }
  if (std::isfinite(ihi)) {
    const Jet b = smooth_transition((ohi - s) / (ohi - ihi));
    deriv = deriv * b.value - value * b.deriv / (ohi - ihi);
    value *= b.value;
  }
  return {value, deriv};
}

}  // namespace

double NeighbourhoodSpec::bump(std::span<const double> z, std::span<double> grad) const {
  const std::size_t n = z.size();
  std::vector<Jet> w(n);
  double total = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = window(z[i], outer_lo[i], inner_lo[i], inner_hi[i], outer_hi[i]);
    total *= w[i].value;
  }
  if (grad.empty()) return total;
  for (std::size_t i = 0; i < n; ++i) {
    double g = w[i].deriv;
    if (g != 0.0) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) g *= w[j].value;
      }
    }
    grad[i] = g;
  }
  return total;
}

bool NeighbourhoodSpec::in_inner(std::span<const double> z) const {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < inner_lo[i] || z[i] > inner_hi[i]) return false;
  }
  return true;
}

bool NeighbourhoodSpec::outside(std::span<const double> z) const {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] <= outer_lo[i] || z[i] >= outer_hi[i]) return true;
  }
  return false;
}

LocalizedHamiltonian::LocalizedHamiltonian(HamiltonianPtr inner, NeighbourhoodSpec U)
    : inner_(std::move(inner)), U_(std::move(U)) {
  const std::size_t n = inner_->dim();
  if (U_.inner_lo.size() != n || U_.inner_hi.size() != n || U_.outer_lo.size() != n ||
      U_.outer_hi.size() != n) {
    throw InputError("localize: neighbourhood has wrong dimension");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool lo_ok = !std::isfinite(U_.inner_lo[i]) || U_.outer_lo[i] < U_.inner_lo[i];
    const bool hi_ok = !std::isfinite(U_.inner_hi[i]) || U_.inner_hi[i] < U_.outer_hi[i];
    if (!(U_.inner_lo[i] <= U_.inner_hi[i]) || !lo_ok || !hi_ok) {
      throw InputError("localize: inner box must sit strictly inside the outer box");
    }
  }
}

double LocalizedHamiltonian::value(std::span<const double> z) const {
  if (U_.outside(z)) return 0.0;
  const double b = U_.bump(z, {});
  if (b == 0.0) return 0.0;
  return b * inner_->value(z);
}

double LocalizedHamiltonian::value_and_gradient(std::span<const double> z,
                                                std::span<double> grad) const {
  const std::size_t n = dim();
  std::fill(grad.begin(), grad.begin() + n, 0.0);
  if (U_.outside(z)) return 0.0;
  std::vector<double> db(n);
  const double b = U_.bump(z, db);
  if (b == 0.0) return 0.0;
  const double F = inner_->value_and_gradient(z, grad);
  for (std::size_t i = 0; i < n; ++i) grad[i] = b * grad[i] + F * db[i];
  return b * F;
}

std::shared_ptr<const LocalizedHamiltonian> localize(HamiltonianPtr F, NeighbourhoodSpec U,
                                                     const ExcisionTarget& Z) {
  if (!F) throw InputError("localize: null Hamiltonian");
  auto out = std::make_shared<LocalizedHamiltonian>(F, std::move(U));
  std::vector<double> z(F->dim());
  for (const auto& s : Z.samples) {
    if (s.size() + 1 != z.size()) throw InputError("localize: target sample has wrong dimension");
    std::copy(s.begin(), s.end(), z.begin());
    z.back() = 0.0;
    if (!out->neighbourhood().in_inner(z)) {
      throw InputError("localize: neighbourhood does not contain the target with margin");
    }
  }
  return out;
}

}  // namespace excision
