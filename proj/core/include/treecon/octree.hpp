#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treecon/density.hpp"
#include "treecon/features.hpp"

namespace treecon {

/// Axis-aligned closed box [lo, hi].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  bool contains(std::span<const double> point) const;
  double volume() const;
  /// True if this box lies inside `outer` up to `slack` per bound.
  bool inside(const Box& outer, double slack = 0.0) const;

  friend bool operator==(const Box&, const Box&) = default;
};

struct TreeConfig {
  std::size_t max_depth = 4;
  std::size_t min_samples = 10;
  std::size_t grid_size = 256;
  double rel_floor = 0.05;
  double min_gain = 0.05;
  std::optional<double> bandwidth;
  /// Modes whose separating valley stays above this fraction of the lower peak are merged.
  double valley_ratio = 0.5;
  /// Impurities closer than this to the best count as tied; the lowest dimension wins.
  double tie_tolerance = 0.04;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  friend bool operator==(const TreeConfig&, const TreeConfig&) = default;
};

struct TreeNode;

struct ChildEdge {
  double lo = 0.0;
  double hi = 0.0;
  std::unique_ptr<TreeNode> node;
};

struct TreeNode {
  Box box;
  std::optional<std::size_t> split_dim;
  std::vector<ChildEdge> children;
  std::size_t sample_count = 0;

  bool is_leaf() const { return children.empty(); }
};

/// One-class decision tree; the safe set is the union of its leaf boxes.
/// Immutable once built; safe for concurrent reads.
class Tree {
 public:
  /// Validates the structural invariants (child boxes, interval order, containment);
  /// throws SchemaError when they do not hold.
  Tree(std::unique_ptr<TreeNode> root, TreeConfig config, FeatureBounds bounds);

  Tree(Tree&&) noexcept = default;
  Tree& operator=(Tree&&) noexcept = default;

  std::size_t dim() const { return bounds_.dim(); }
  const TreeNode& root() const { return *root_; }
  const TreeConfig& config() const { return config_; }
  const FeatureBounds& bounds() const { return bounds_; }

  std::size_t leaf_count() const;
  std::size_t depth() const;

 private:
  std::unique_ptr<TreeNode> root_;
  TreeConfig config_;
  FeatureBounds bounds_;
};

struct SplitCandidate {
  std::size_t dim = 0;
  IntervalSet intervals;
  double impurity = 1.0;
};

/// Per-dimension split evaluation used by best_split; one entry per dimension whose box
/// width is positive. Each produced density curve is passed to `on_curve` when set.
std::vector<SplitCandidate> score_dimensions(std::span<const FeatureVector* const> points, const Box& box,
                                             const TreeConfig& config,
                                             const std::function<void(const DensityCurve&)>& on_curve = {});

/// Lowest-impurity dimension, provided impurity <= 1 - min_gain; impurities within
/// tie_tolerance of the minimum resolve to the lowest dimension index.
std::optional<SplitCandidate> best_split(std::span<const FeatureVector* const> points, const Box& box,
                                         const TreeConfig& config,
                                         const std::function<void(const DensityCurve&)>& on_curve = {});
std::optional<SplitCandidate> best_split(std::span<const FeatureVector> points, const Box& box,
                                         const TreeConfig& config);

/// Depth-first construction from the dataset bounding box. Deterministic.
/// Throws DomainError if the dataset holds fewer than min_samples points.
Tree build_tree(const Dataset& dataset, const TreeConfig& config,
                const std::function<void(const DensityCurve&)>& on_curve = {});

/// Closed-box membership in the union of leaves. Throws DomainError on dimension mismatch.
bool contains(const Tree& tree, std::span<const double> point);

/// Leaf boxes in depth-first order.
std::vector<Box> leaf_boxes(const Tree& tree);

std::string tree_to_json(const Tree& tree);
Tree tree_from_json(const std::string& text);
void save_tree(const std::filesystem::path& path, const Tree& tree);
Tree load_tree(const std::filesystem::path& path);

}  // namespace treecon
