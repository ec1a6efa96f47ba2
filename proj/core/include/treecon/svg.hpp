#pragma once

#include <string>
#include <vector>

#include "treecon/navenv.hpp"
#include "treecon/octree.hpp"

namespace treecon::nav {

/// Everything drawn by render_svg. Leaf boxes must be two-dimensional.
struct Scene {
  Vec2 world_lo{0.0, 0.0};
  Vec2 world_hi{1.0, 1.0};
  Region obstacle = NavConfig{}.obstacle;
  std::vector<Box> leaves;
  std::vector<std::vector<Vec2>> paths;
  double pixels = 480.0;  // canvas side
};

/// Scene with the world and obstacle of `config`.
Scene make_scene(const NavConfig& config);
/// Positions of a trajectory's states, (x, y) read from the first two state entries.
std::vector<Vec2> path_of(const Trajectory& trajectory);

/// One world rect, one red obstacle rect, one outlined rect per leaf (class "leaf") and
/// one polyline per path with at least one point (class "trajectory"). y points up.
/// Output depends only on the scene. Throws DomainError on a non-2D leaf or empty world.
std::string render_svg(const Scene& scene);

}  // namespace treecon::nav
