#include "treecon/octree.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "treecon/error.hpp"

namespace treecon {

using nlohmann::json;

bool Box::contains(std::span<const double> point) const {
  if (point.size() != lo.size()) throw DomainError("point dimension does not match box");
  for (std::size_t j = 0; j < point.size(); ++j) {
    if (point[j] < lo[j] || point[j] > hi[j]) return false;
  }
  return true;
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
  return v;
}

bool Box::inside(const Box& outer, double slack) const {
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (lo[j] < outer.lo[j] - slack || hi[j] > outer.hi[j] + slack) return false;
  }
  return true;
}

void TreeConfig::validate() const {
  if (min_samples == 0) throw ConfigError("min_samples must be positive");
  if (grid_size < 16) throw ConfigError("grid_size must be at least 16");
  if (!(rel_floor > 0.0 && rel_floor < 1.0)) throw ConfigError("rel_floor must lie in (0, 1)");
  if (!(min_gain > 0.0 && min_gain < 1.0)) throw ConfigError("min_gain must lie in (0, 1)");
  if (bandwidth && !(*bandwidth > 0.0)) throw ConfigError("bandwidth override must be positive");
  if (!(valley_ratio > 0.0 && valley_ratio <= 1.0)) throw ConfigError("valley_ratio must lie in (0, 1]");
  if (!(tie_tolerance >= 0.0)) throw ConfigError("tie_tolerance must be non-negative");
}

namespace {

void validate_node(const TreeNode& node, std::size_t k) {
  if (node.box.lo.size() != k || node.box.hi.size() != k) throw SchemaError("node box has wrong dimension");
  for (std::size_t j = 0; j < k; ++j) {
    if (!(node.box.lo[j] <= node.box.hi[j])) throw SchemaError("node box has lo > hi");
  }
  if (node.split_dim.has_value() != !node.children.empty()) {
    throw SchemaError("split_dim must be present exactly when a node has children");
  }
  if (node.children.empty()) return;
  const auto j = *node.split_dim;
  if (j >= k) throw SchemaError("split_dim out of range");
  for (std::size_t n = 0; n < node.children.size(); ++n) {
    const auto& edge = node.children[n];
    if (!edge.node) throw SchemaError("child edge without node");
    if (!(edge.lo <= edge.hi)) throw SchemaError("child interval has lo > hi");
    if (edge.lo < node.box.lo[j] || edge.hi > node.box.hi[j]) {
      throw SchemaError("child interval leaves the parent box");
    }
    if (n > 0 && node.children[n - 1].hi > edge.lo) throw SchemaError("child intervals overlap or are unsorted");
    Box expected = node.box;
    expected.lo[j] = edge.lo;
    expected.hi[j] = edge.hi;
    if (!(edge.node->box == expected)) throw SchemaError("child box is not the parent box narrowed along split_dim");
    validate_node(*edge.node, k);
  }
}

std::size_t count_leaves(const TreeNode& node) {
  if (node.is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : node.children) n += count_leaves(*c.node);
  return n;
}

std::size_t node_depth(const TreeNode& node) {
  std::size_t d = 0;
  for (const auto& c : node.children) d = std::max(d, 1 + node_depth(*c.node));
  return d;
}

std::unique_ptr<TreeNode> grow(std::vector<const FeatureVector*> points, Box box, std::size_t depth,
                               const TreeConfig& config, const std::function<void(const DensityCurve&)>& on_curve) {
  auto node = std::make_unique<TreeNode>();
  node->box = std::move(box);
  node->sample_count = points.size();
  if (depth >= config.max_depth || points.size() < config.min_samples) return node;

  auto split = best_split(points, node->box, config, on_curve);
  if (!split) return node;

  const auto j = split->dim;
  const auto& intervals = split->intervals.intervals;
  std::vector<std::vector<const FeatureVector*>> buckets(intervals.size());
  for (const auto* p : points) {
    const auto n = split->intervals.locate((*p)[j]);
    if (n < buckets.size()) buckets[n].push_back(p);
  }

  node->split_dim = j;
  for (std::size_t n = 0; n < intervals.size(); ++n) {
    Box child_box = node->box;
    child_box.lo[j] = intervals[n].lo;
    child_box.hi[j] = intervals[n].hi;
    node->children.push_back(
        {intervals[n].lo, intervals[n].hi, grow(std::move(buckets[n]), std::move(child_box), depth + 1, config, on_curve)});
  }
  return node;
}

bool node_contains(const TreeNode& node, std::span<const double> point) {
  if (node.is_leaf()) return node.box.contains(point);
  const auto j = *node.split_dim;
  for (const auto& c : node.children) {
    if (point[j] >= c.lo && point[j] <= c.hi && node_contains(*c.node, point)) return true;
  }
  return false;
}

void collect_leaves(const TreeNode& node, std::vector<Box>& out) {
  if (node.is_leaf()) {
    out.push_back(node.box);
    return;
  }
  for (const auto& c : node.children) collect_leaves(*c.node, out);
}

json node_to_json(const TreeNode& node) {
  json j;
  j["box"] = {{"lo", node.box.lo}, {"hi", node.box.hi}};
  j["split_dim"] = node.split_dim ? json(*node.split_dim) : json(nullptr);
  j["children"] = json::array();
  for (const auto& c : node.children) {
    j["children"].push_back({{"L", c.lo}, {"R", c.hi}, {"node", node_to_json(*c.node)}});
  }
  j["sample_count"] = node.sample_count;
  return j;
}

std::unique_ptr<TreeNode> node_from_json(const json& j) {
  auto node = std::make_unique<TreeNode>();
  node->box.lo = j.at("box").at("lo").get<std::vector<double>>();
  node->box.hi = j.at("box").at("hi").get<std::vector<double>>();
  if (!j.at("split_dim").is_null()) node->split_dim = j.at("split_dim").get<std::size_t>();
  for (const auto& c : j.at("children")) {
    node->children.push_back({c.at("L").get<double>(), c.at("R").get<double>(), node_from_json(c.at("node"))});
  }
  node->sample_count = j.at("sample_count").get<std::size_t>();
  return node;
}

json config_to_json(const TreeConfig& c) {
  json j = {{"max_depth", c.max_depth},     {"min_samples", c.min_samples}, {"grid_size", c.grid_size},
            {"rel_floor", c.rel_floor},     {"min_gain", c.min_gain},       {"valley_ratio", c.valley_ratio},
            {"tie_tolerance", c.tie_tolerance}};
  j["bandwidth"] = c.bandwidth ? json(*c.bandwidth) : json(nullptr);
  return j;
}

TreeConfig config_from_json(const json& j) {
  TreeConfig c;
  c.max_depth = j.at("max_depth").get<std::size_t>();
  c.min_samples = j.at("min_samples").get<std::size_t>();
  c.grid_size = j.at("grid_size").get<std::size_t>();
  c.rel_floor = j.at("rel_floor").get<double>();
  c.min_gain = j.at("min_gain").get<double>();
  c.valley_ratio = j.at("valley_ratio").get<double>();
  c.tie_tolerance = j.at("tie_tolerance").get<double>();
  if (!j.at("bandwidth").is_null()) c.bandwidth = j.at("bandwidth").get<double>();
  return c;
}

}  // namespace

Tree::Tree(std::unique_ptr<TreeNode> root, TreeConfig config, FeatureBounds bounds)
    : root_(std::move(root)), config_(std::move(config)), bounds_(std::move(bounds)) {
  if (!root_) throw SchemaError("tree without root");
  if (bounds_.min.size() != bounds_.max.size() || bounds_.min.empty()) throw SchemaError("invalid feature bounds");
  if (root_->box.lo != bounds_.min || root_->box.hi != bounds_.max) {
    throw SchemaError("root box must equal the feature bounds");
  }
  validate_node(*root_, bounds_.dim());
}

std::size_t Tree::leaf_count() const { return count_leaves(*root_); }
std::size_t Tree::depth() const { return node_depth(*root_); }

std::vector<SplitCandidate> score_dimensions(std::span<const FeatureVector* const> points, const Box& box,
                                             const TreeConfig& config,
                                             const std::function<void(const DensityCurve&)>& on_curve) {
  std::vector<SplitCandidate> out;
  if (points.empty()) return out;
  std::vector<double> values(points.size());
  for (std::size_t j = 0; j < box.dim(); ++j) {
    const double lo = box.lo[j];
    const double hi = box.hi[j];
    if (!(hi > lo)) continue;
    for (std::size_t i = 0; i < points.size(); ++i) values[i] = (*points[i])[j];
    std::sort(values.begin(), values.end());

    const double h = config.bandwidth ? *config.bandwidth
                     : values.size() >= 2 ? bandwidth_silverman(values)
                                          : 1e-3;
    const auto curve = kde_estimate(values, h, config.grid_size);
    if (on_curve) on_curve(curve);
    auto modes = detect_modes(curve, config.rel_floor);
    modes = merge_shallow_modes(curve, modes, config.valley_ratio);
    auto intervals = partition_intervals(values, curve, modes, j);
    intervals = close_narrow_gaps(intervals, h);
    intervals = refine_level_cuts(intervals, values, h, lo, hi, config.min_gain);
    const double score = impurity(intervals, lo, hi);
    out.push_back({j, std::move(intervals), score});
  }
  return out;
}

std::optional<SplitCandidate> best_split(std::span<const FeatureVector* const> points, const Box& box,
                                         const TreeConfig& config,
                                         const std::function<void(const DensityCurve&)>& on_curve) {
  auto candidates = score_dimensions(points, box, config, on_curve);
  if (candidates.empty()) return std::nullopt;
  double lowest = 1.0;
  for (const auto& c : candidates) lowest = std::min(lowest, c.impurity);
  if (lowest > 1.0 - config.min_gain) return std::nullopt;
  for (auto& c : candidates) {
    if (c.impurity <= lowest + config.tie_tolerance && c.impurity <= 1.0 - config.min_gain) return std::move(c);
  }
  return std::nullopt;
}

std::optional<SplitCandidate> best_split(std::span<const FeatureVector> points, const Box& box,
                                         const TreeConfig& config) {
  std::vector<const FeatureVector*> ptrs;
  ptrs.reserve(points.size());
  for (const auto& p : points) ptrs.push_back(&p);
  return best_split(ptrs, box, config);
}

Tree build_tree(const Dataset& dataset, const TreeConfig& config,
                const std::function<void(const DensityCurve&)>& on_curve) {
  config.validate();
  if (dataset.size() < config.min_samples || dataset.empty()) {
    throw DomainError("dataset holds " + std::to_string(dataset.size()) + " points, fewer than min_samples = " +
                      std::to_string(config.min_samples));
  }
  auto bounds = feature_bounds(dataset);
  std::vector<const FeatureVector*> points;
  points.reserve(dataset.size());
  for (const auto& p : dataset.points()) points.push_back(&p);
  auto root = grow(std::move(points), Box{bounds.min, bounds.max}, 0, config, on_curve);
  return Tree(std::move(root), config, std::move(bounds));
}

bool contains(const Tree& tree, std::span<const double> point) {
  if (point.size() != tree.dim()) throw DomainError("point dimension does not match tree");
  return node_contains(tree.root(), point);
}

std::vector<Box> leaf_boxes(const Tree& tree) {
  std::vector<Box> out;
  collect_leaves(tree.root(), out);
  return out;
}

std::string tree_to_json(const Tree& tree) {
  json j;
  j["k"] = tree.dim();
  j["config"] = config_to_json(tree.config());
  j["bounds"] = {{"min", tree.bounds().min}, {"max", tree.bounds().max}};
  j["root"] = node_to_json(tree.root());
  return j.dump(2) + "\n";
}

Tree tree_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("tree JSON: ") + e.what());
  }
  try {
    FeatureBounds bounds{j.at("bounds").at("min").get<std::vector<double>>(),
                         j.at("bounds").at("max").get<std::vector<double>>()};
    if (j.at("k").get<std::size_t>() != bounds.dim()) throw SchemaError("tree k does not match bounds");
    return Tree(node_from_json(j.at("root")), config_from_json(j.at("config")), std::move(bounds));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("tree JSON: ") + e.what());
  }
}

void save_tree(const std::filesystem::path& path, const Tree& tree) { write_text_file(path, tree_to_json(tree)); }

Tree load_tree(const std::filesystem::path& path) { return tree_from_json(read_text_file(path)); }

}  // namespace treecon
