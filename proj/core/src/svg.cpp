#include "treecon/svg.hpp"

#include <locale>
#include <sstream>

#include "treecon/error.hpp"

namespace treecon::nav {

namespace {

// Fixed precision keeps the bytes stable across platforms.
std::string px(double v) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out.setf(std::ios::fixed);
  out.precision(2);
  out << v;
  return out.str();
}

struct Canvas {
  Vec2 lo, hi;
  double side;
  double sx(double x) const { return (x - lo.x) / (hi.x - lo.x) * side; }
  double sy(double y) const { return (hi.y - y) / (hi.y - lo.y) * side; }
};

void rect(std::ostringstream& out, const Canvas& c, double x0, double y0, double x1, double y1,
          const char* cls, const char* style) {
  out << "  <rect class=\"" << cls << "\" x=\"" << px(c.sx(x0)) << "\" y=\"" << px(c.sy(y1)) << "\" width=\""
      << px(c.sx(x1) - c.sx(x0)) << "\" height=\"" << px(c.sy(y0) - c.sy(y1)) << "\" " << style << "/>\n";
}

}  // namespace

Scene make_scene(const NavConfig& config) {
  Scene scene;
  scene.world_lo = config.world_lo;
  scene.world_hi = config.world_hi;
  scene.obstacle = config.obstacle;
  return scene;
}

std::vector<Vec2> path_of(const Trajectory& trajectory) {
  std::vector<Vec2> path;
  path.reserve(trajectory.steps.size());
  for (const auto& step : trajectory.steps) {
    if (step.state.size() < 2) throw DomainError("trajectory state needs at least two entries to draw");
    path.push_back({step.state[0], step.state[1]});
  }
  return path;
}

std::string render_svg(const Scene& scene) {
  if (!(scene.world_hi.x > scene.world_lo.x && scene.world_hi.y > scene.world_lo.y && scene.pixels > 0.0))
    throw DomainError("scene world box is empty");
  for (const auto& leaf : scene.leaves)
    if (leaf.dim() != 2) throw DomainError("only two-dimensional leaf boxes can be drawn");

  const Canvas c{scene.world_lo, scene.world_hi, scene.pixels};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(c.side) << "\" height=\"" << px(c.side)
      << "\" viewBox=\"0 0 " << px(c.side) << ' ' << px(c.side) << "\">\n";
  rect(out, c, c.lo.x, c.lo.y, c.hi.x, c.hi.y, "world", "fill=\"white\" stroke=\"black\" stroke-width=\"1\"");
  const auto& o = scene.obstacle;
  rect(out, c, o.x_lo, o.y_lo, o.x_hi, o.y_hi, "obstacle", "fill=\"red\" fill-opacity=\"0.5\" stroke=\"none\"");
  for (const auto& leaf : scene.leaves)
    rect(out, c, leaf.lo[0], leaf.lo[1], leaf.hi[0], leaf.hi[1], "leaf",
         "fill=\"none\" stroke=\"blue\" stroke-width=\"2\" stroke-dasharray=\"6 3\"");
  for (const auto& path : scene.paths) {
    if (path.empty()) continue;
    out << "  <polyline class=\"trajectory\" points=\"";
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i) out << ' ';
      out << px(c.sx(path[i].x)) << ',' << px(c.sy(path[i].y));
    }
    out << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace treecon::nav
