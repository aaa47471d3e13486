#include "excision/symflow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "excision/errors.hpp"

namespace excision {

const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Completed: return "Completed";
    case FlowStatus::EscapedChart: return "EscapedChart";
    case FlowStatus::ToleranceFailure: return "ToleranceFailure";
  }
  return "?";
}

namespace {

// Dormand-Prince 5(4).
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                           11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

// m copies of the phase space stacked end to end, flowing along sign * X_F.
class Stacked {
 public:
  Stacked(const HamiltonianField& F, std::size_t members, double sign,
          const IntegratorOptions& o)
      : F_(F), n_(F.dim()), m_(members), sign_(sign), o_(o), scratch_(F.dim()) {}

  std::size_t size() const { return n_ * m_; }

  void rhs(std::span<const double> Z, std::span<double> dZ) {
    for (std::size_t k = 0; k < m_; ++k) {
      F_.vector_field(Z.subspan(k * n_, n_), dZ.subspan(k * n_, n_));
    }
    if (sign_ < 0) {
      for (double& d : dZ) d = -d;
    }
  }

  bool valid(std::span<const double> Z) const {
    for (std::size_t k = 0; k < m_; ++k) {
      const auto z = Z.subspan(k * n_, n_);
      for (double c : z) {
        if (!std::isfinite(c)) return false;
      }
      if (!(F_.chart_margin(z) > 0.0)) return false;
    }
    return true;
  }

  bool escaped(std::span<const double> Z) const {
    for (std::size_t k = 0; k < m_; ++k) {
      const auto z = Z.subspan(k * n_, n_);
      if (F_.chart_margin(z) < o_.delta_esc) return true;
      double r2 = 0.0;
      for (double c : z) r2 += c * c;
      if (r2 >= o_.r_max * o_.r_max) return true;
    }
    return false;
  }

  // One DP step of size h from Z with k[0] = f(Z). Returns false when a stage
  // leaves the chart. On success out holds the 5th-order result, k[6] its
  // derivative and err the scaled error norm.
  bool step(std::span<const double> Z, double h, std::array<std::vector<double>, 7>& k,
            std::vector<double>& out, double& err) {
    const std::size_t N = size();
    std::vector<double>& tmp = stage_;
    tmp.resize(N);
    for (int s = 1; s < 7; ++s) {
      for (std::size_t i = 0; i < N; ++i) {
        double acc = 0.0;
        for (int j = 0; j < s; ++j) acc += kA[s][j] * k[j][i];
        tmp[i] = Z[i] + h * acc;
      }
      if (!valid(tmp)) return false;
      rhs(tmp, k[s]);
    }
    out.assign(tmp.begin(), tmp.end());  // stage 7 point is the 5th-order result
    err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double e = 0.0;
      for (int j = 0; j < 7; ++j) e += (kB5[j] - kB4[j]) * k[j][i];
      const double scale = o_.tol * std::max({1.0, std::abs(Z[i]), std::abs(out[i])});
      err = std::max(err, std::abs(h * e) / scale);
    }
    return true;
  }

 private:
  const HamiltonianField& F_;
  std::size_t n_, m_;
  double sign_;
  const IntegratorOptions& o_;
  std::vector<double> scratch_;
  std::vector<double> stage_;
};

struct StackedOutcome {
  std::vector<double> Z;
  FlowStatus status = FlowStatus::Completed;
  double elapsed = 0.0, lower = 0.0, upper = 0.0;
  std::size_t steps = 0;
};

StackedOutcome run(Stacked& sys, std::vector<double> Z, double t, const IntegratorOptions& o,
                   std::size_t n_single) {
  StackedOutcome res;
  const double sign = t >= 0 ? 1.0 : -1.0;
  const double T = std::abs(t);
  auto record = [&](double s, std::span<const double> z) {
    if (!o.record) return;
    Point row{sign * s};
    row.insert(row.end(), z.begin(), z.begin() + n_single);
    o.record->push_back(std::move(row));
  };
  record(0.0, Z);
  if (!sys.valid(Z)) throw InputError("integrate: initial point outside the chart");
  if (sys.escaped(Z)) {
    res.Z = std::move(Z);
    res.status = FlowStatus::EscapedChart;
    return res;
  }
  const std::size_t N = sys.size();
  std::array<std::vector<double>, 7> k;
  for (auto& v : k) v.assign(N, 0.0);
  sys.rhs(Z, k[0]);
  if (T == 0.0 || std::all_of(k[0].begin(), k[0].end(), [](double d) { return d == 0.0; })) {
    // Fixed point of an autonomous field.
    res.Z = std::move(Z);
    res.elapsed = t;
    if (T > 0.0) record(T, res.Z);
    return res;
  }
  const double h_min = 1e-14 * std::max(1.0, T);
  double h = std::min(T, 1e-2);
  double done = 0.0;
  std::vector<double> next;
  double err = 0.0;
  while (done < T) {
    if (res.steps >= o.max_steps) {
      res.status = FlowStatus::ToleranceFailure;
      break;
    }
    const bool last = T - done <= h;
    if (last) h = T - done;
    if (!sys.step(Z, h, k, next, err)) {
      h *= 0.5;
      if (h < h_min) {
        res.status = FlowStatus::ToleranceFailure;
        break;
      }
      continue;
    }
    if (!(err <= 1.0)) {
      h *= std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      if (h < h_min) {
        res.status = FlowStatus::ToleranceFailure;
        break;
      }
      continue;
    }
    ++res.steps;
    if (sys.escaped(next)) {
      // Bisect the step length: lo stays inside, hi has crossed.
      const std::vector<double> k0 = k[0];
      double lo = 0.0, hi = h;
      std::vector<double> inside = Z, trial;
      double e = 0.0;
      while (hi - lo > o.bracket_width) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        k[0] = k0;
        if (sys.step(Z, mid, k, trial, e) && !sys.escaped(trial)) {
          lo = mid;
          inside = trial;
        } else {
          hi = mid;
        }
      }
      res.Z = std::move(inside);
      res.status = FlowStatus::EscapedChart;
      res.lower = sign * (done + lo);
      res.upper = sign * (done + hi);
      res.elapsed = res.lower;
      record(done + lo, res.Z);
      return res;
    }
    done = last ? T : done + h;
    Z.swap(next);
    k[0].swap(k[6]);
    record(done, Z);
    h *= err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
  }
  res.Z = std::move(Z);
  res.elapsed = sign * done;
  return res;
}

}  // namespace

FlowOutcome integrate(const HamiltonianField& F, std::span<const double> z0, double t,
                      const IntegratorOptions& options) {
  if (z0.size() != F.dim()) throw InputError("integrate: point has wrong dimension");
  Stacked sys(F, 1, t >= 0 ? 1.0 : -1.0, options);
  StackedOutcome r = run(sys, Point(z0.begin(), z0.end()), t, options, F.dim());
  FlowOutcome out;
  out.endpoint = std::move(r.Z);
  out.elapsed = r.elapsed;
  out.status = r.status;
  out.t_esc_lower = r.lower;
  out.t_esc_upper = r.upper;
  out.step_count = r.steps;
  out.energy_drift = std::abs(F.value(out.endpoint) - F.value(z0));
  return out;
}

std::vector<FlowOutcome> integrate_ensemble(const HamiltonianField& F,
                                            const std::vector<Point>& z0, double t,
                                            const IntegratorOptions& options) {
  const std::size_t n = F.dim();
  std::vector<double> Z;
  Z.reserve(n * z0.size());
  for (const auto& z : z0) {
    if (z.size() != n) throw InputError("integrate: point has wrong dimension");
    Z.insert(Z.end(), z.begin(), z.end());
  }
  IntegratorOptions o = options;
  o.record = nullptr;
  Stacked sys(F, z0.size(), t >= 0 ? 1.0 : -1.0, o);
  StackedOutcome r = run(sys, std::move(Z), t, o, n);
  std::vector<FlowOutcome> out(z0.size());
  for (std::size_t k = 0; k < z0.size(); ++k) {
    auto& m = out[k];
    m.endpoint.assign(r.Z.begin() + k * n, r.Z.begin() + (k + 1) * n);
    m.elapsed = r.elapsed;
    m.status = r.status;
    m.t_esc_lower = r.lower;
    m.t_esc_upper = r.upper;
    m.step_count = r.steps;
    m.energy_drift = std::abs(F.value(m.endpoint) - F.value(z0[k]));
  }
  return out;
}

namespace {

Point finish_map(const FlowOutcome& o, const char* what) {
  if (o.status == FlowStatus::EscapedChart) {
    std::ostringstream os;
    os << what << ": trajectory leaves the chart at t in [" << o.t_esc_lower << ", "
       << o.t_esc_upper << "]";
    throw ExcisedPointError(os.str());
  }
  if (o.status == FlowStatus::ToleranceFailure) {
    throw ToleranceFailure(std::string(what) + ": step size underflow", o.elapsed);
  }
  return o.endpoint;
}

}  // namespace

Point time1_map(const HamiltonianField& F, std::span<const double> z0,
                const IntegratorOptions& options) {
  return finish_map(integrate(F, z0, 1.0, options), "time1_map");
}

Point inverse_time1_map(const HamiltonianField& F, std::span<const double> z1,
                        const IntegratorOptions& options) {
  return finish_map(integrate(F, z1, -1.0, options), "inverse_time1_map");
}

BatchMap time1_batch(const HamiltonianField& F, double direction, IntegratorOptions options) {
  options.record = nullptr;
  return [&F, direction, options](const std::vector<Point>& pts) {
    const auto outs = integrate_ensemble(F, pts, direction, options);
    std::vector<Point> res;
    res.reserve(outs.size());
    for (const auto& o : outs) res.push_back(finish_map(o, "time1_batch"));
    return res;
  };
}

BatchMap pointwise(std::function<Point(const Point&)> map) {
  return [map = std::move(map)](const std::vector<Point>& pts) {
    std::vector<Point> res;
    res.reserve(pts.size());
    for (const auto& p : pts) res.push_back(map(p));
    return res;
  };
}

BatchMap compose(BatchMap first, BatchMap second) {
  return [first = std::move(first), second = std::move(second)](const std::vector<Point>& pts) {
    return second(first(pts));
  };
}

Matrix numerical_jacobian(const BatchMap& map, std::span<const double> z, double fd_step,
                          bool richardson) {
  const std::size_t n = z.size();
  const std::vector<double> steps =
      richardson ? std::vector<double>{fd_step, 0.5 * fd_step} : std::vector<double>{fd_step};
  std::vector<Point> stencil;
  stencil.reserve(2 * n * steps.size());
  for (double h : steps) {
    for (std::size_t j = 0; j < n; ++j) {
      for (double s : {1.0, -1.0}) {
        Point p(z.begin(), z.end());
        p[j] += s * h;
        stencil.push_back(std::move(p));
      }
    }
  }
  std::vector<Point> images;
  try {
    images = map(stencil);
  } catch (const ExcisedPointError& e) {
    throw StencilError(std::string("stencil point excised: ") + e.what());
  } catch (const FlowDomainError& e) {
    throw StencilError(std::string("stencil point outside the flow domain: ") + e.what());
  }
  if (images.size() != stencil.size()) throw InternalError("jacobian: map changed batch size");
  auto central = [&](std::size_t level) {
    Matrix J(n);
    for (std::size_t j = 0; j < n; ++j) {
      const Point& up = images[level * 2 * n + 2 * j];
      const Point& dn = images[level * 2 * n + 2 * j + 1];
      if (up.size() != n || dn.size() != n) throw InputError("jacobian: map must be square");
      // Divide by the step actually represented in z +- h.
      const double width = stencil[level * 2 * n + 2 * j][j] - stencil[level * 2 * n + 2 * j + 1][j];
      for (std::size_t i = 0; i < n; ++i) J(i, j) = (up[i] - dn[i]) / width;
    }
    return J;
  };
  Matrix J = central(0);
  if (richardson) {
    const Matrix half = central(1);
    for (std::size_t i = 0; i < J.a.size(); ++i) J.a[i] = (4.0 * half.a[i] - J.a[i]) / 3.0;
  }
  return J;
}

double symplecticity_residual(const Matrix& J) {
  const std::size_t n = J.n;
  if (n % 2 != 0) throw InputError("symplecticity: odd dimension");
  // (J^T Omega J)_ij = sum_k J_{2k,i} J_{2k+1,j} - J_{2k+1,i} J_{2k,j}.
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; k += 2) s += J(k, i) * J(k + 1, j) - J(k + 1, i) * J(k, j);
      double omega = 0.0;
      if (i % 2 == 0 && j == i + 1) omega = 1.0;
      if (j % 2 == 0 && i == j + 1) omega = -1.0;
      worst = std::max(worst, std::abs(s - omega));
    }
  }
  return worst;
}

SymplecticCheck check_symplectic(const BatchMap& map, std::span<const double> z, double fd_step,
                                 bool richardson) {
  SymplecticCheck c;
  c.point.assign(z.begin(), z.end());
  c.jacobian = numerical_jacobian(map, z, fd_step, richardson);
  c.residual = symplecticity_residual(c.jacobian);
  c.fd_step = fd_step;
  return c;
}

bool escaped_by_one(const FlowOutcome& o) {
  return o.status == FlowStatus::EscapedChart && std::abs(o.t_esc_lower) <= 1.0;
}

EscapeReport classify_escape(const HamiltonianField& F,
                             const std::function<bool(std::span<const double>)>& in_Z,
                             const std::vector<Point>& grid,
                             const std::function<bool(std::span<const double>)>& in_margin,
                             const EscapeProbe& probe) {
  EscapeReport rep;
  rep.outcomes.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point& z = grid[i];
    if (in_margin && in_margin(z)) {
      ++rep.skipped;
      continue;
    }
    ++rep.checked;
    FlowOutcome o = integrate(F, z, probe.probe_time, probe.integrator);
    const bool expected = in_Z(z);
    const bool got = escaped_by_one(o);
    if (got) ++rep.excised;
    if (o.status == FlowStatus::Completed) {
      rep.max_energy_drift = std::max(rep.max_energy_drift, o.energy_drift);
    }
    if (got != expected || o.status == FlowStatus::ToleranceFailure) {
      rep.mismatches.push_back({i, expected, o});
    }
    rep.outcomes[i] = std::move(o);
  }
  return rep;
}

void write_trajectory_csv(std::ostream& os, const std::vector<Point>& rows) {
  const std::size_t cols = rows.empty() ? 1 : rows.front().size();
  os << 't';
  for (std::size_t i = 1; i + 1 < cols; i += 2) {
    os << ",x" << (i + 1) / 2 << ",y" << (i + 1) / 2;
  }
  os << '\n' << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const std::vector<Point>& rows) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  write_trajectory_csv(f, rows);
}

}  // namespace excision
