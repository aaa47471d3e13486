#pragma once
// Piecewise-linear trees in the plane, excised branch by branch. Each branch
// gets a strip chart onto the model ray (leaf at x = 0, node end at x -> 1)
// and the planar ray Hamiltonian in that chart.
#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "excision/ham_extension.hpp"
#include "excision/symflow.hpp"

namespace excision {

using Vec2 = std::array<double, 2>;

enum class RootMode { OpenRooted, Retract };

struct TreeSpec {
  std::vector<Vec2> nodes;
  std::vector<std::array<std::size_t, 2>> edges;
  RootMode mode = RootMode::OpenRooted;
  std::size_t root = 0;  // removed node, or the retraction point z0
  double w0 = 0.05;      // strip half-width away from the node end
  double eps = 0.02;     // overhang of the ray cutoff beyond the leaf end
  double u_radius = 0.1; // U = points within this distance of the tree

  /// Connected, acyclic, nondegenerate edges, root a node.
  void validate() const;
  double distance(const Vec2& w) const;
  /// On the tree as a subset of M (the root itself is not in M).
  bool contains(const Vec2& w, double tol = 1e-12) const;
};

/// "Ray with two horns": horns (-1, 1) and (-1, -1) meet at the origin, and
/// the stem runs to the removed root (2, 0).
TreeSpec ray_with_two_horns();
/// The segment [-1, 1] x {0}, retracted onto z0 = 0.
TreeSpec segment_retract();

/// Symplectic embedding of the model half-plane (-1, 1) x R onto
/// {s < length} of the branch frame: x -> s = 2 L x / (1 + x) along the branch
/// from the leaf end a, with the cotangent lift sigma = y / s'(x) across it.
class StripChart {
 public:
  StripChart(Vec2 leaf, Vec2 node, double w0, double taper_slope, double eps);

  double length() const { return length_; }
  const Vec2& leaf() const { return a_; }
  const Vec2& node() const { return b_; }
  double taper_slope() const { return slope_; }

  Vec2 to_ambient(double x, double y) const;
  std::optional<std::array<double, 2>> to_model(const Vec2& w) const;
  /// Half-width of the strip at distance d from the node end.
  double width(double d) const;
  /// Region where the branch Hamiltonian can be nonzero: overhang past the
  /// leaf end included, |sigma| < width.
  bool in_envelope(const Vec2& w) const;
  /// Points on the envelope outline, for overlap checks.
  std::vector<Vec2> outline(std::size_t samples) const;
  /// Profile h(x) for the planar ray Hamiltonian: its support stays in the
  /// envelope.
  ScalarField1D profile() const;

 private:
  Vec2 a_, b_, e_, n_;
  double length_, w0_, slope_, eps_;
};

StripChart strip_chart(const Vec2& leaf, const Vec2& node, double w0, double theta_min,
                       double eps);

struct Stage {
  std::size_t edge;
  std::size_t leaf_node;  // leaf end of the branch at this stage
  StripChart chart;
  std::shared_ptr<const RayHamiltonian> F;
};

struct StageEscape {
  Point point;                        // image (or last point before escape)
  std::optional<std::size_t> escaped; // stage index that removed the point
  double max_energy_drift = 0.0;
};

class StagedExcision {
 public:
  StagedExcision(TreeSpec tree, std::vector<Stage> stages, std::size_t components);

  const TreeSpec& tree() const { return tree_; }
  const std::vector<Stage>& stages() const { return stages_; }
  std::size_t components() const { return components_; }

  /// Runs the stages in order (forward) or reversed (inverse).
  StageEscape trace(const Vec2& w, bool inverse, const IntegratorOptions& o = {}) const;
  /// Composed time-1 map; ExcisedPointError when a stage removes the point.
  Point forward(const Point& w, const IntegratorOptions& o = {}) const;
  Point inverse(const Point& w, const IntegratorOptions& o = {}) const;
  BatchMap forward_batch(IntegratorOptions o = {}) const;
  BatchMap inverse_batch(IntegratorOptions o = {}) const;
  bool in_support(const Vec2& w) const;

 private:
  std::vector<Point> stage_batch(std::size_t k, const std::vector<Point>& pts, double dir,
                                 const IntegratorOptions& o) const;

  TreeSpec tree_;
  std::vector<Stage> stages_;
  std::size_t components_;
};

/// Leaf-first staging of an open-rooted tree. Verifies that every stage's
/// envelope misses the edges still present at that stage, that envelopes
/// are pairwise disjoint away from the 2 w0 balls around junctions, and that
/// they lie in U.
StagedExcision excise_tree(const TreeSpec& spec);
/// Splits T minus z0 into open-rooted components at z0 and stages each.
StagedExcision retract_tree(const TreeSpec& spec);

}  // namespace excision
