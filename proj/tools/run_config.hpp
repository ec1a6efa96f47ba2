#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "treecon/crl.hpp"
#include "treecon/navenv.hpp"
#include "treecon/octree.hpp"

namespace treecon::cli {

struct ExpertConfig {
  std::size_t count = 20;
  double noise = 0.15;
};

struct PathsConfig {
  std::string trajectories;  // empty: generate expert data
  std::string out = "treecon-out";
};

/// Everything a run depends on. The one seed drives expert generation and training.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string feature_map = "identity_xy";
  ExpertConfig expert;
  TreeConfig tree = [] {
    TreeConfig t;
    t.max_depth = 2;
    return t;
  }();
  nav::NavConfig nav;
  crl::TrainConfig train;
  double threshold = 0.001;
  std::size_t eval_episodes = 100;
  PathsConfig paths;

  /// Throws ConfigError on any invalid section.
  void validate() const;
  /// TrainConfig carrying the run seed.
  crl::TrainConfig train_config() const;
};

/// Missing keys keep their defaults; unknown keys and wrongly typed values throw
/// ConfigError, malformed JSON throws ParseError. The result is validated.
RunConfig run_config_from_json(std::string_view text);
/// Fully resolved form; keys sorted, so equal configs give equal bytes.
std::string run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace treecon::cli
