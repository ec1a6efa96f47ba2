#include <gtest/gtest.h>

#include "toy.hpp"
#include "treecon/error.hpp"
#include "treecon/svg.hpp"

using namespace treecon;
using namespace treecon::nav;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

Scene toy_scene(std::size_t paths) {
  Scene s = make_scene(NavConfig{});
  s.leaves = leaf_boxes(treecon::testing::two_box_tree());
  const auto trajs = generate_expert(paths, 0.1, 1);
  for (const auto& t : trajs) s.paths.push_back(path_of(t));
  return s;
}

}  // namespace

TEST(Svg, ToyScene) {
  const std::string svg = render_svg(toy_scene(3));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "class=\"leaf\""), 2u);
  EXPECT_EQ(count(svg, "class=\"obstacle\""), 1u);
  EXPECT_EQ(count(svg, "fill=\"red\""), 1u);
  EXPECT_EQ(count(svg, "<polyline"), 3u);
}

TEST(Svg, NoPathsNoPolylines) {
  const std::string svg = render_svg(toy_scene(0));
  EXPECT_EQ(count(svg, "<polyline"), 0u);
  EXPECT_EQ(count(svg, "class=\"leaf\""), 2u);
}

TEST(Svg, SameSceneSameBytes) { EXPECT_EQ(render_svg(toy_scene(3)), render_svg(toy_scene(3))); }

TEST(Svg, YAxisPointsUp) {
  Scene s;
  s.pixels = 100.0;
  s.paths.push_back({{0.0, 0.0}, {1.0, 1.0}});
  EXPECT_NE(render_svg(s).find("points=\"0.00,100.00 100.00,0.00\""), std::string::npos);
}

TEST(Svg, RejectsBadScenes) {
  Scene s;
  s.leaves.push_back(Box{{0.0}, {1.0}});
  EXPECT_THROW(render_svg(s), DomainError);
  Scene flat;
  flat.world_hi = flat.world_lo;
  EXPECT_THROW(render_svg(flat), DomainError);
}
