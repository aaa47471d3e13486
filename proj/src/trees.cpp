#include "excision/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "excision/errors.hpp"

namespace excision {

namespace {

double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
Vec2 sub(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }

double segment_distance(const Vec2& w, const Vec2& a, const Vec2& b) {
  const Vec2 ab = sub(b, a);
  const double t = std::clamp(dot(sub(w, a), ab) / dot(ab, ab), 0.0, 1.0);
  return norm(sub(w, {a[0] + t * ab[0], a[1] + t * ab[1]}));
}

std::size_t degree(const TreeSpec& t, std::size_t v) {
  std::size_t d = 0;
  for (const auto& e : t.edges) d += (e[0] == v) + (e[1] == v);
  return d;
}

}  // namespace

// -- tree specs -----------------------------------------------------------------

void TreeSpec::validate() const {
  const std::size_t n = nodes.size();
  if (n < 2) throw InputError("tree: needs at least two nodes");
  if (edges.size() != n - 1) throw InputError("tree: a tree on n nodes has n - 1 edges");
  if (root >= n) throw InputError("tree: root is not a node");
  if (!(w0 > 0.0) || !(eps > 0.0 && eps < 1.0) || !(u_radius > 0.0)) {
    throw InputError("tree: w0, eps and u_radius must be positive (eps < 1)");
  }
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [a, b] = edges[k];
    if (a >= n || b >= n || a == b) throw InputError("tree: bad edge endpoints");
    if (norm(sub(nodes[a], nodes[b])) == 0.0) throw InputError("tree: degenerate edge");
    const std::size_t ra = find(a), rb = find(b);
    if (ra == rb) throw InputError("tree: edges form a cycle");
    parent[ra] = rb;
  }
}

double TreeSpec::distance(const Vec2& w) const {
  double d = kInf;
  for (const auto& e : edges) d = std::min(d, segment_distance(w, nodes[e[0]], nodes[e[1]]));
  return d;
}

bool TreeSpec::contains(const Vec2& w, double tol) const {
  if (w == nodes[root]) return false;
  return distance(w) <= tol;
}

TreeSpec ray_with_two_horns() {
  TreeSpec t;
  t.nodes = {{-1.0, 1.0}, {-1.0, -1.0}, {0.0, 0.0}, {2.0, 0.0}};
  t.edges = {{{0, 2}}, {{1, 2}}, {{2, 3}}};
  t.mode = RootMode::OpenRooted;
  t.root = 3;
  return t;
}

TreeSpec segment_retract() {
  TreeSpec t;
  t.nodes = {{-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
  t.edges = {{{0, 1}}, {{1, 2}}};
  t.mode = RootMode::Retract;
  t.root = 1;
  return t;
}

// -- strip charts ---------------------------------------------------------------

StripChart::StripChart(Vec2 leaf, Vec2 node, double w0, double taper_slope, double eps)
    : a_(leaf), b_(node), w0_(w0), slope_(taper_slope), eps_(eps) {
  const Vec2 d = sub(b_, a_);
  length_ = norm(d);
  if (!(length_ > 0.0)) throw InputError("strip_chart: degenerate branch");
  if (!(w0 > 0.0) || !(taper_slope > 0.0)) throw InputError("strip_chart: bad taper");
  e_ = {d[0] / length_, d[1] / length_};
  n_ = {-e_[1], e_[0]};
}

Vec2 StripChart::to_ambient(double x, double y) const {
  const double L = length_;
  const double s = 2.0 * L * x / (1.0 + x);
  const double sigma = y * (1.0 + x) * (1.0 + x) / (2.0 * L);
  return {a_[0] + s * e_[0] + sigma * n_[0], a_[1] + s * e_[1] + sigma * n_[1]};
}

std::optional<std::array<double, 2>> StripChart::to_model(const Vec2& w) const {
  const Vec2 r = sub(w, a_);
  const double s = dot(r, e_), sigma = dot(r, n_);
  if (!(s < length_)) return std::nullopt;
  const double x = s / (2.0 * length_ - s);
  return std::array<double, 2>{x, sigma * 2.0 * length_ / ((1.0 + x) * (1.0 + x))};
}

double StripChart::width(double d) const {
  if (!(d > 0.0)) return 0.0;
  return w0_ * d * slope_ / (w0_ + d * slope_);
}

bool StripChart::in_envelope(const Vec2& w) const {
  const Vec2 r = sub(w, a_);
  const double s = dot(r, e_), sigma = dot(r, n_);
  const double s_min = -2.0 * length_ * eps_ / (1.0 - eps_);
  // The node end itself is not on the branch; keep rounding from putting it there.
  return s > s_min && length_ - s > 1e-12 * length_ && std::abs(sigma) < width(length_ - s);
}

std::vector<Vec2> StripChart::outline(std::size_t samples) const {
  std::vector<Vec2> out;
  const double s_min = -2.0 * length_ * eps_ / (1.0 - eps_);
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = s_min + (length_ - s_min) * (i + 0.5) / samples;
    const double w = width(length_ - s);
    for (double side : {-1.0, 1.0}) {
      out.push_back({a_[0] + s * e_[0] + side * w * n_[0], a_[1] + s * e_[1] + side * w * n_[1]});
    }
  }
  const double w = width(length_ - s_min);
  for (std::size_t i = 0; i <= samples / 8; ++i) {
    const double sigma = -w + 2.0 * w * i / (samples / 8.0);
    out.push_back({a_[0] + s_min * e_[0] + sigma * n_[0], a_[1] + s_min * e_[1] + sigma * n_[1]});
  }
  return out;
}

ScalarField1D StripChart::profile() const {
  // h = 1.8 q^2 with q = phi'(x) w(L - phi(x)); the ray cutoff keeps
  // y^2 <= h / 2, i.e. |sigma| <= 0.95 w.
  const double L = length_, w0 = w0_, t = slope_;
  auto q_and_dq = [=](double x) {
    const double p1 = 2.0 * L / ((1.0 + x) * (1.0 + x));
    const double p2 = -4.0 * L / ((1.0 + x) * (1.0 + x) * (1.0 + x));
    const double d = L - 2.0 * L * x / (1.0 + x);
    const double den = w0 + d * t;
    const double w = w0 * d * t / den;
    const double dw = w0 * w0 * t / (den * den);
    return std::array<double, 2>{p1 * w, p2 * w - p1 * p1 * dw};
  };
  ScalarField1D h;
  h.eval = [=](double x) {
    const double q = q_and_dq(x)[0];
    return 1.8 * q * q;
  };
  h.deriv = [=](double x) {
    const auto q = q_and_dq(x);
    return 3.6 * q[0] * q[1];
  };
  h.lo = -1.0;
  h.hi = 1.0;
  return h;
}

StripChart strip_chart(const Vec2& leaf, const Vec2& node, double w0, double theta_min,
                       double eps) {
  if (!(theta_min > 0.0)) throw InputError("strip_chart: branches meet at zero angle");
  const double theta = std::min(theta_min, std::numbers::pi / 2);
  return StripChart(leaf, node, w0, 0.5 * std::tan(0.5 * theta), eps);
}

// -- staging --------------------------------------------------------------------

namespace {

double min_sibling_angle(const TreeSpec& t, std::size_t edge, std::size_t at) {
  const auto& e = t.edges[edge];
  const std::size_t other = e[0] == at ? e[1] : e[0];
  const Vec2 dir = sub(t.nodes[other], t.nodes[at]);
  double best = std::numbers::pi;
  for (std::size_t k = 0; k < t.edges.size(); ++k) {
    if (k == edge) continue;
    const auto& f = t.edges[k];
    if (f[0] != at && f[1] != at) continue;
    const Vec2 d2 = sub(t.nodes[f[0] == at ? f[1] : f[0]], t.nodes[at]);
    const double c = std::clamp(dot(dir, d2) / (norm(dir) * norm(d2)), -1.0, 1.0);
    best = std::min(best, std::acos(c));
  }
  return best;
}

// Leaf-first order within one set of edges: repeatedly take the first node
// (input order) other than the root with exactly one remaining edge.
void stage_edges(const TreeSpec& t, std::vector<std::size_t> remaining,
                 std::vector<Stage>& out) {
  while (!remaining.empty()) {
    bool found = false;
    for (std::size_t v = 0; v < t.nodes.size() && !found; ++v) {
      if (v == t.root) continue;
      std::size_t count = 0, which = 0;
      for (std::size_t k : remaining) {
        if (t.edges[k][0] == v || t.edges[k][1] == v) {
          ++count;
          which = k;
        }
      }
      if (count != 1) continue;
      const std::size_t u = t.edges[which][0] == v ? t.edges[which][1] : t.edges[which][0];
      StripChart chart = strip_chart(t.nodes[v], t.nodes[u], t.w0,
                                     min_sibling_angle(t, which, u), t.eps);
      auto F = build_ray_hamiltonian_n1(t.eps, chart.profile());
      out.push_back({which, v, std::move(chart), std::move(F)});
      remaining.erase(std::find(remaining.begin(), remaining.end(), which));
      found = true;
    }
    if (!found) throw InputError("tree: no leaf left to excise (is the root isolated?)");
  }
}

bool near_junction(const TreeSpec& t, const Vec2& w) {
  for (std::size_t v = 0; v < t.nodes.size(); ++v) {
    if ((v == t.root || degree(t, v) >= 2) && norm(sub(w, t.nodes[v])) < 2.0 * t.w0) return true;
  }
  return false;
}

void verify_stages(const TreeSpec& t, const std::vector<Stage>& stages) {
  constexpr std::size_t kSamples = 2000;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const StripChart& c = stages[k].chart;
    // Edges still present when stage k runs.
    for (std::size_t j = k + 1; j < stages.size(); ++j) {
      const auto& e = t.edges[stages[j].edge];
      for (std::size_t i = 0; i < kSamples; ++i) {
        const double u = (i + 0.5) / kSamples;
        const Vec2 w{t.nodes[e[0]][0] + u * (t.nodes[e[1]][0] - t.nodes[e[0]][0]),
                     t.nodes[e[0]][1] + u * (t.nodes[e[1]][1] - t.nodes[e[0]][1])};
        if (c.in_envelope(w)) {
          std::ostringstream os;
          os << "tree: strip of edge " << stages[k].edge << " meets edge " << stages[j].edge;
          throw InputError(os.str());
        }
      }
    }
    const auto outline = c.outline(kSamples);
    for (const Vec2& w : outline) {
      if (t.distance(w) >= t.u_radius) {
        std::ostringstream os;
        os << "tree: strip of edge " << stages[k].edge << " leaves U";
        throw InputError(os.str());
      }
      for (std::size_t j = 0; j < stages.size(); ++j) {
        if (j == k || near_junction(t, w)) continue;
        if (stages[j].chart.in_envelope(w)) {
          std::ostringstream os;
          os << "tree: strips of edges " << stages[k].edge << " and " << stages[j].edge
             << " overlap";
          throw InputError(os.str());
        }
      }
    }
  }
}

}  // namespace

StagedExcision excise_tree(const TreeSpec& spec) {
  spec.validate();
  if (spec.mode != RootMode::OpenRooted) throw InputError("excise_tree: tree must be open-rooted");
  std::vector<std::size_t> all(spec.edges.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  std::vector<Stage> stages;
  stage_edges(spec, all, stages);
  verify_stages(spec, stages);
  return StagedExcision(spec, std::move(stages), 1);
}

StagedExcision retract_tree(const TreeSpec& spec) {
  spec.validate();
  if (spec.mode != RootMode::Retract) throw InputError("retract_tree: tree must be in retract mode");
  const std::size_t z0 = spec.root;
  std::vector<bool> taken(spec.edges.size(), false);
  std::vector<Stage> stages;
  std::size_t components = 0;
  for (std::size_t k = 0; k < spec.edges.size(); ++k) {
    if (taken[k] || (spec.edges[k][0] != z0 && spec.edges[k][1] != z0)) continue;
    // Grow the component hanging off z0 through edge k.
    std::vector<std::size_t> comp{k};
    taken[k] = true;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      for (std::size_t end : spec.edges[comp[i]]) {
        if (end == z0) continue;
        for (std::size_t j = 0; j < spec.edges.size(); ++j) {
          if (!taken[j] && (spec.edges[j][0] == end || spec.edges[j][1] == end)) {
            taken[j] = true;
            comp.push_back(j);
          }
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    stage_edges(spec, comp, stages);
    ++components;
  }
  verify_stages(spec, stages);
  return StagedExcision(spec, std::move(stages), components);
}

StagedExcision::StagedExcision(TreeSpec tree, std::vector<Stage> stages, std::size_t components)
    : tree_(std::move(tree)), stages_(std::move(stages)), components_(components) {}

bool StagedExcision::in_support(const Vec2& w) const {
  for (const auto& s : stages_) {
    if (s.chart.in_envelope(w)) return true;
  }
  return false;
}

StageEscape StagedExcision::trace(const Vec2& w0, bool inverse, const IntegratorOptions& o) const {
  StageEscape out;
  Vec2 w = w0;
  const double dir = inverse ? -1.0 : 1.0;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const std::size_t k = inverse ? stages_.size() - 1 - i : i;
    const Stage& st = stages_[k];
    if (!st.chart.in_envelope(w)) continue;
    const auto m = st.chart.to_model(w);
    const Point z{(*m)[0], (*m)[1]};
    const FlowOutcome f = integrate(*st.F, z, dir, o);
    if (f.status == FlowStatus::ToleranceFailure) {
      throw ToleranceFailure("staged excision: step size underflow", f.elapsed);
    }
    if (f.status == FlowStatus::EscapedChart) {
      out.point = {w[0], w[1]};
      out.escaped = k;
      return out;
    }
    out.max_energy_drift = std::max(out.max_energy_drift, f.energy_drift);
    if (f.step_count == 0) continue;  // fixed point: keep w bit for bit
    w = st.chart.to_ambient(f.endpoint[0], f.endpoint[1]);
  }
  out.point = {w[0], w[1]};
  return out;
}

Point StagedExcision::forward(const Point& w, const IntegratorOptions& o) const {
  const StageEscape r = trace({w[0], w[1]}, false, o);
  if (r.escaped) {
    throw ExcisedPointError("staged excision: point removed in stage " +
                            std::to_string(*r.escaped));
  }
  return r.point;
}

Point StagedExcision::inverse(const Point& w, const IntegratorOptions& o) const {
  const StageEscape r = trace({w[0], w[1]}, true, o);
  if (r.escaped) {
    throw ExcisedPointError("staged excision: backward flow left the chart in stage " +
                            std::to_string(*r.escaped));
  }
  return r.point;
}

std::vector<Point> StagedExcision::stage_batch(std::size_t k, const std::vector<Point>& pts,
                                               double dir, const IntegratorOptions& o) const {
  const Stage& st = stages_[k];
  std::vector<Point> out = pts;
  std::vector<std::size_t> idx;
  std::vector<Point> model;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 w{pts[i][0], pts[i][1]};
    if (!st.chart.in_envelope(w)) continue;
    const auto m = st.chart.to_model(w);
    idx.push_back(i);
    model.push_back({(*m)[0], (*m)[1]});
  }
  if (idx.empty()) return out;
  const auto res = integrate_ensemble(*st.F, model, dir, o);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (res[j].status == FlowStatus::EscapedChart) {
      throw ExcisedPointError("staged excision: stencil point removed in stage " +
                              std::to_string(k));
    }
    if (res[j].status == FlowStatus::ToleranceFailure) {
      throw ToleranceFailure("staged excision: step size underflow", res[j].elapsed);
    }
    const Vec2 w = st.chart.to_ambient(res[j].endpoint[0], res[j].endpoint[1]);
    out[idx[j]] = {w[0], w[1]};
  }
  return out;
}

BatchMap StagedExcision::forward_batch(IntegratorOptions o) const {
  o.record = nullptr;
  return [this, o](const std::vector<Point>& pts) {
    std::vector<Point> cur = pts;
    for (std::size_t k = 0; k < stages_.size(); ++k) cur = stage_batch(k, cur, 1.0, o);
    return cur;
  };
}

BatchMap StagedExcision::inverse_batch(IntegratorOptions o) const {
  o.record = nullptr;
  return [this, o](const std::vector<Point>& pts) {
    std::vector<Point> cur = pts;
    for (std::size_t k = stages_.size(); k-- > 0;) cur = stage_batch(k, cur, -1.0, o);
    return cur;
  };
}

}  // namespace excision
