#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace treecon {

using FeatureVector = std::vector<double>;

struct Step {
  std::vector<double> state;
  std::vector<double> action;
};

/// Ordered (state, action) pairs of one episode. Never empty once validated.
struct Trajectory {
  std::vector<Step> steps;

  std::size_t length() const { return steps.size(); }
};

/// Feature vectors phi(s, a) gathered over all expert steps, in trajectory-then-step order.
/// Immutable after construction; safe for concurrent reads.
class Dataset {
 public:
  Dataset() = default;
  /// Throws SchemaError on ragged dimensions, DomainError on non-finite values or k == 0.
  Dataset(std::size_t dim, std::vector<FeatureVector> points);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<FeatureVector>& points() const { return points_; }
  const FeatureVector& operator[](std::size_t i) const { return points_[i]; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<FeatureVector> points_;
};

/// Componentwise min/max of a dataset.
struct FeatureBounds {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t dim() const { return min.size(); }
  bool contains(std::span<const double> point) const;

  friend bool operator==(const FeatureBounds&, const FeatureBounds&) = default;
};

enum class TrajectoryFormat { jsonl };

std::vector<Trajectory> load_trajectories(const std::filesystem::path& path,
                                          TrajectoryFormat format = TrajectoryFormat::jsonl);
std::vector<Trajectory> parse_trajectories_jsonl(std::string_view text);
std::string trajectories_to_jsonl(std::span<const Trajectory> trajectories);
void save_trajectories(const std::filesystem::path& path, std::span<const Trajectory> trajectories);

/// Feature maps are looked up by name so runs are reproducible from config alone.
/// Only `identity_xy` is registered: state (x, y, ...) -> [x, y].
FeatureVector apply_feature_map(std::string_view name, const Step& step);
std::size_t feature_map_dim(std::string_view name);
bool has_feature_map(std::string_view name);

Dataset build_dataset(std::span<const Trajectory> trajectories, std::string_view feature_map);

FeatureBounds feature_bounds(const Dataset& dataset);

/// CSV with header `phi0,...,phi{k-1}`; values written with 17 significant digits.
std::string dataset_to_csv(const Dataset& dataset);
Dataset parse_dataset_csv(std::string_view text);
void save_dataset_csv(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset_csv(const std::filesystem::path& path);

// Locale-independent number text helpers shared by the serializers.
std::string format_double(double value);            // shortest round-trip form
std::string format_double_17(double value);         // %.17g
double parse_double(std::string_view text);         // throws ParseError

std::string read_text_file(const std::filesystem::path& path);   // throws IoError
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace treecon
