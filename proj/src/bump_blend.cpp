#include "excision/bump_blend.hpp"

#include <algorithm>
#include <cmath>

#include "excision/errors.hpp"

namespace excision {

namespace {

constexpr int kMaxDepth = 24;

// exp(-1 / (1 - s)) for s = |q - c|^2 / R^2 < 1, and d/ds of it.
inline void mollifier(double s, double& value, double& dvalue_ds) {
  if (s >= 1.0) {
    value = 0.0;
    dvalue_ds = 0.0;
    return;
  }
  const double m = 1.0 - s;
  value = std::exp(-1.0 / m);
  dvalue_ds = -value / (m * m);
}

}  // namespace

double BumpBlend::Cell::radius() const {
  double sq = 0.0;
  for (double h : half) sq += h * h;
  return kBumpOverlap * std::sqrt(sq);
}

std::shared_ptr<const BumpBlend> BumpBlend::build(std::vector<double> lo, std::vector<double> hi,
                                                  double max_half, const Decider& decide) {
  if (lo.empty() || lo.size() != hi.size()) throw InputError("blend: bad region");
  if (lo.size() > 3) throw InputError("blend: base dimension above 3 is not supported");
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (!(hi[j] > lo[j])) throw InputError("blend: region must have hi > lo");
  }
  if (!(max_half > 0.0)) throw InputError("blend: cell size must be positive");
  auto blend = std::make_shared<BumpBlend>();
  BumpBlend& b = *blend;
  const std::size_t d = lo.size();
  b.lo_ = lo;
  b.hi_ = hi;
  b.root_counts_.resize(d);
  b.root_size_.resize(d);
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) {
    b.root_counts_[j] = std::max(1, static_cast<int>(std::ceil((hi[j] - lo[j]) / (2 * max_half))));
    b.root_size_[j] = (hi[j] - lo[j]) / b.root_counts_[j];
    total *= b.root_counts_[j];
  }
  {
    Cell probe{std::vector<double>(d), std::vector<double>(d)};
    for (std::size_t j = 0; j < d; ++j) probe.half[j] = 0.5 * b.root_size_[j];
    b.root_radius_ = probe.radius();
  }
  b.roots_.reserve(total);
  std::vector<int> idx(d, 0);
  for (std::size_t r = 0; r < total; ++r) {
    Cell cell{std::vector<double>(d), std::vector<double>(d)};
    for (std::size_t j = 0; j < d; ++j) {
      cell.half[j] = 0.5 * b.root_size_[j];
      cell.center[j] = lo[j] + (idx[j] + 0.5) * b.root_size_[j];
    }
    b.roots_.push_back(b.add_node(cell, decide, 0));
    for (std::size_t j = 0; j < d; ++j) {
      if (++idx[j] < b.root_counts_[j]) break;
      idx[j] = 0;
    }
  }
  return blend;
}

int BumpBlend::add_node(const Cell& cell, const Decider& decide, int depth) {
  const std::size_t d = cell.center.size();
  const Decision decision = decide(cell);
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (std::holds_alternative<Emit>(decision)) {
    const double r = cell.radius();
    Node& node = nodes_[id];
    node.bump = static_cast<int>(bumps_.size());
    node.reach_lo.resize(d);
    node.reach_hi.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      node.reach_lo[j] = cell.center[j] - r;
      node.reach_hi[j] = cell.center[j] + r;
    }
    bumps_.push_back({cell.center, r, std::get<Emit>(decision).constant});
    return id;
  }
  if (depth >= kMaxDepth) throw InternalError("blend: refinement did not terminate");
  std::vector<int> children;
  for (std::size_t k = 0; k < (std::size_t{1} << d); ++k) {
    Cell child{cell.center, cell.half};
    for (std::size_t j = 0; j < d; ++j) {
      child.half[j] = 0.5 * cell.half[j];
      child.center[j] += ((k >> j) & 1 ? 0.5 : -0.5) * cell.half[j];
    }
    children.push_back(add_node(child, decide, depth + 1));
  }
  std::vector<double> rlo(d, kInf), rhi(d, -kInf);
  for (int c : children) {
    for (std::size_t j = 0; j < d; ++j) {
      rlo[j] = std::min(rlo[j], nodes_[c].reach_lo[j]);
      rhi[j] = std::max(rhi[j], nodes_[c].reach_hi[j]);
    }
  }
  Node& node = nodes_[id];
  node.children = std::move(children);
  node.reach_lo = std::move(rlo);
  node.reach_hi = std::move(rhi);
  return id;
}

template <typename Visit>
void BumpBlend::visit_near(std::span<const double> c, double r, Visit&& visit) const {
  const std::size_t d = dim();
  // Descendant supports stay within the root bump radius of the root center.
  std::vector<int> first(d), last(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double pos = (c[j] - lo_[j]) / root_size_[j];
    const int spread = 1 + static_cast<int>(std::ceil((root_radius_ + r) / root_size_[j]));
    const int center = static_cast<int>(std::floor(pos));
    first[j] = std::max(0, center - spread);
    last[j] = std::min(root_counts_[j] - 1, center + spread);
    if (first[j] > last[j]) return;
  }
  std::vector<int> idx(first);
  std::vector<int> stack;
  while (true) {
    int flat = 0;
    for (std::size_t j = d; j-- > 0;) flat = flat * root_counts_[j] + idx[j];
    stack.push_back(roots_[flat]);
    while (!stack.empty()) {
      const Node& node = nodes_[stack.back()];
      stack.pop_back();
      bool inside = true;
      for (std::size_t j = 0; j < d && inside; ++j) {
        inside = c[j] + r > node.reach_lo[j] && c[j] - r < node.reach_hi[j];
      }
      if (!inside) continue;
      if (node.bump >= 0) {
        visit(bumps_[node.bump]);
      } else {
        for (int ch : node.children) stack.push_back(ch);
      }
    }
    std::size_t j = 0;
    for (; j < d; ++j) {
      if (++idx[j] <= last[j]) break;
      idx[j] = first[j];
    }
    if (j == d) break;
  }
}

double BumpBlend::value(std::span<const double> p) const {
  double weight = 0.0, sum = 0.0;
  visit_near(p, 0.0, [&](const Bump& b) {
    double sq = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) sq += (p[j] - b.center[j]) * (p[j] - b.center[j]);
    double phi = 0.0, dphi = 0.0;
    mollifier(sq / (b.radius * b.radius), phi, dphi);
    weight += phi;
    sum += phi * b.constant;
  });
  if (!(weight > 0.0)) throw InputError("blend evaluated outside its tiled region");
  return sum / weight;
}

double BumpBlend::value_and_gradient(std::span<const double> p, std::span<double> grad) const {
  const std::size_t d = dim();
  if (p.size() != d || grad.size() != d) throw InputError("blend: dimension mismatch");
  double weight = 0.0, sum = 0.0;
  double dw[3] = {0, 0, 0}, ds[3] = {0, 0, 0};
  visit_near(p, 0.0, [&](const Bump& b) {
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) sq += (p[j] - b.center[j]) * (p[j] - b.center[j]);
    const double inv_r2 = 1.0 / (b.radius * b.radius);
    double phi = 0.0, dphi = 0.0;
    mollifier(sq * inv_r2, phi, dphi);
    if (phi == 0.0) return;
    weight += phi;
    sum += phi * b.constant;
    for (std::size_t j = 0; j < d; ++j) {
      const double g = dphi * 2.0 * (p[j] - b.center[j]) * inv_r2;
      dw[j] += g;
      ds[j] += g * b.constant;
    }
  });
  if (!(weight > 0.0)) throw InputError("blend evaluated outside its tiled region");
  const double v = sum / weight;
  for (std::size_t j = 0; j < d; ++j) grad[j] = (ds[j] - v * dw[j]) / weight;
  return v;
}

double BumpBlend::max_constant_near(std::span<const double> c, double r) const {
  double best = -kInf;
  visit_near(c, r, [&](const Bump& b) {
    double sq = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) sq += (c[j] - b.center[j]) * (c[j] - b.center[j]);
    if (std::sqrt(sq) < b.radius + r) best = std::max(best, b.constant);
  });
  return best;
}

double BumpBlend::min_constant() const {
  double m = kInf;
  for (const Bump& b : bumps_) m = std::min(m, b.constant);
  return m;
}

double BumpBlend::max_constant() const {
  double m = -kInf;
  for (const Bump& b : bumps_) m = std::max(m, b.constant);
  return m;
}

std::shared_ptr<const BumpBlend> BumpBlend::scaled(double factor) const {
  auto out = std::make_shared<BumpBlend>(*this);
  for (Bump& b : out->bumps_) b.constant *= factor;
  return out;
}

SmoothFunction BumpBlend::as_function(std::shared_ptr<const BumpBlend> self) const {
  return {dim(), [self](std::span<const double> p) { return self->value(p); },
          [self](std::span<const double> p, std::span<double> g) {
            self->value_and_gradient(p, g);
          }};
}

}  // namespace excision
