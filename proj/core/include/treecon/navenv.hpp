#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "treecon/features.hpp"
#include "treecon/octree.hpp"

namespace treecon::nav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Axis-aligned region with per-side openness, used for the ground-truth obstacle.
struct Region {
  double x_lo, x_hi, y_lo, y_hi;
  bool x_lo_open, x_hi_open, y_lo_open, y_hi_open;

  bool contains(Vec2 p) const;
};

struct NavConfig {
  Vec2 start{0.1, 0.1};
  Vec2 goal{0.9, 0.9};
  double goal_radius = 0.05;
  double step_size = 0.05;
  std::size_t max_steps = 200;
  double gamma = 0.99;
  double goal_bonus = 10.0;
  /// x in (0.1, 0.7), y in (0.3, 1.0]
  Region obstacle{0.1, 0.7, 0.3, 1.0, true, true, true, false};
  Vec2 world_lo{0.0, 0.0};
  Vec2 world_hi{1.0, 1.0};

  /// Throws ConfigError when start/goal sit outside the world or inside the obstacle.
  void validate() const;
};

/// The two safe rectangles the scripted expert stays inside.
struct SafeCorridor {
  Box lower{{0.1, 0.1}, {0.7, 0.3}};
  Box right{{0.7, 0.1}, {0.9, 0.9}};

  bool contains(Vec2 p) const;
  /// Nearest point of the corridor union.
  Vec2 project(Vec2 p) const;
};

enum class Action : std::uint8_t { E = 0, NE, N, NW, W, SW, S, SE };
inline constexpr std::size_t kActionCount = 8;
Vec2 direction(Action a);

struct NavState {
  Vec2 position;
  std::size_t steps_taken = 0;
  bool done = false;
};

struct StepResult {
  NavState next;
  double reward = 0.0;
  int gt_cost = 0;
  bool done = false;
  bool reached_goal = false;
};

/// Stateless dynamics of the 2D navigation task; one instance may serve many episodes.
class NavEnv {
 public:
  explicit NavEnv(NavConfig config = {});

  const NavConfig& config() const { return config_; }

  /// The initial state distribution is a point mass; the seed is accepted for interface symmetry.
  NavState reset(std::uint64_t seed = 0) const;
  /// Throws UsageError when the episode has already finished.
  StepResult step(const NavState& state, Action action) const;
  bool in_obstacle(Vec2 p) const { return config_.obstacle.contains(p); }
  bool at_goal(Vec2 p) const;

 private:
  NavConfig config_;
};

/// Scripted corridor-following expert: east along the lower lane, then north to the goal,
/// with Gaussian lateral noise of standard deviation `noise`, truncated to the corridor
/// shrunk by 0.02 per wall (offsets leaving it are redrawn; the nominal point is kept if
/// 64 draws all miss). The clearance keeps learned boundaries on the safe side.
/// Each trajectory starts at the start state and ends on the goal; actions are the
/// displacement to the next state (zero for the final state).
std::vector<Trajectory> generate_expert(std::size_t count, double noise, std::uint64_t seed,
                                        const NavConfig& config = {});

}  // namespace treecon::nav
