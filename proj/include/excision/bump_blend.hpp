#pragma once
// Smooth functions on a box in R^d built as partition-of-unity blends of
// constants: f = sum phi_i c_i / sum phi_i with phi_i the standard mollifier
// bump on the ball B(center_i, R_i). Cells come from a 2^d-tree tiling, so a
// point only ever sees a handful of bumps.
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "excision/null_fields.hpp"

namespace excision {

/// Bump radius over the half-diagonal of its cell. Must exceed 1 so the
/// closed cell sits strictly inside the bump support.
inline constexpr double kBumpOverlap = 1.5;

class BumpBlend {
 public:
  struct Cell {
    std::vector<double> center;
    std::vector<double> half;  // half-widths per axis
    double radius() const;
  };
  struct Subdivide {};
  struct Emit {
    double constant;
  };
  using Decision = std::variant<Subdivide, Emit>;
  /// Called for every cell of the tiling; may ask for the cell to be split
  /// into 2^d children.
  using Decider = std::function<Decision(const Cell&)>;

  /// Tile [lo, hi] with cells of half-width at most `max_half`, refining
  /// wherever `decide` says so.
  static std::shared_ptr<const BumpBlend> build(std::vector<double> lo, std::vector<double> hi,
                                                double max_half, const Decider& decide);

  std::size_t dim() const { return lo_.size(); }
  std::size_t size() const { return bumps_.size(); }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }

  /// Throws InputError where no bump covers p (outside the tiled box).
  double value(std::span<const double> p) const;
  double value_and_gradient(std::span<const double> p, std::span<double> grad) const;
  /// Max of the constants whose bump meets the closed ball B(c, r): a
  /// rigorous upper bound of the blend over that ball.
  double max_constant_near(std::span<const double> c, double r) const;
  double min_constant() const;
  double max_constant() const;

  /// Same bumps, constants multiplied by `factor`.
  std::shared_ptr<const BumpBlend> scaled(double factor) const;
  SmoothFunction as_function(std::shared_ptr<const BumpBlend> self) const;

 private:
  struct Bump {
    std::vector<double> center;
    double radius;
    double constant;
  };
  struct Node {
    std::vector<double> reach_lo, reach_hi;  // box holding every descendant support
    std::vector<int> children;
    int bump = -1;
  };

  int add_node(const Cell& cell, const Decider& decide, int depth);
  template <typename Visit>
  void visit_near(std::span<const double> c, double r, Visit&& visit) const;

  std::vector<double> lo_, hi_;
  std::vector<int> root_counts_;
  std::vector<double> root_size_;
  double root_radius_ = 0.0;
  std::vector<int> roots_;
  std::vector<Node> nodes_;
  std::vector<Bump> bumps_;
};

}  // namespace excision
