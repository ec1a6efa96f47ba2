#include "treecon/navenv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "treecon/error.hpp"

namespace treecon::nav {

namespace {

constexpr int kMaxRedraws = 64;
// Demonstrators keep this clearance from the corridor walls.
constexpr double kWallClearance = 0.02;

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool inside_world(const NavConfig& c, Vec2 p) {
  return p.x >= c.world_lo.x && p.x <= c.world_hi.x && p.y >= c.world_lo.y && p.y <= c.world_hi.y;
}

Vec2 clamp_to(const Box& b, Vec2 p) {
  return {std::clamp(p.x, b.lo[0], b.hi[0]), std::clamp(p.y, b.lo[1], b.hi[1])};
}

}  // namespace

bool Region::contains(Vec2 p) const {
  const bool x_ok = (x_lo_open ? p.x > x_lo : p.x >= x_lo) && (x_hi_open ? p.x < x_hi : p.x <= x_hi);
  const bool y_ok = (y_lo_open ? p.y > y_lo : p.y >= y_lo) && (y_hi_open ? p.y < y_hi : p.y <= y_hi);
  return x_ok && y_ok;
}

void NavConfig::validate() const {
  if (!(step_size > 0.0)) throw ConfigError("step_size must be positive");
  if (!(goal_radius > 0.0)) throw ConfigError("goal_radius must be positive");
  if (max_steps == 0) throw ConfigError("max_steps must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!inside_world(*this, start) || !inside_world(*this, goal)) throw ConfigError("start and goal must lie in the world");
  if (obstacle.contains(start) || obstacle.contains(goal)) throw ConfigError("start and goal must avoid the obstacle");
}

bool SafeCorridor::contains(Vec2 p) const {
  const double v[2] = {p.x, p.y};
  return lower.contains(v) || right.contains(v);
}

Vec2 SafeCorridor::project(Vec2 p) const {
  if (contains(p)) return p;
  const Vec2 a = clamp_to(lower, p);
  const Vec2 b = clamp_to(right, p);
  return dist(a, p) <= dist(b, p) ? a : b;
}

Vec2 direction(Action a) {
  const double angle = static_cast<double>(static_cast<int>(a)) * std::numbers::pi / 4.0;
  return {std::cos(angle), std::sin(angle)};
}

NavEnv::NavEnv(NavConfig config) : config_(std::move(config)) { config_.validate(); }

NavState NavEnv::reset(std::uint64_t /*seed*/) const { return NavState{config_.start, 0, false}; }

bool NavEnv::at_goal(Vec2 p) const { return dist(p, config_.goal) <= config_.goal_radius; }

StepResult NavEnv::step(const NavState& state, Action action) const {
  if (state.done || state.steps_taken >= config_.max_steps) throw UsageError("step called on a finished episode");
  const Vec2 d = direction(action);
  StepResult r;
  r.next.position = {std::clamp(state.position.x + config_.step_size * d.x, config_.world_lo.x, config_.world_hi.x),
                     std::clamp(state.position.y + config_.step_size * d.y, config_.world_lo.y, config_.world_hi.y)};
  r.next.steps_taken = state.steps_taken + 1;
  r.reward = -dist(r.next.position, config_.goal);
  r.gt_cost = in_obstacle(r.next.position) ? 1 : 0;
  r.reached_goal = at_goal(r.next.position);
  if (r.reached_goal) r.reward += config_.goal_bonus;
  r.done = r.reached_goal || r.next.steps_taken >= config_.max_steps;
  r.next.done = r.done;
  return r;
}

std::vector<Trajectory> generate_expert(std::size_t count, double noise, std::uint64_t seed, const NavConfig& config) {
  if (noise < 0.0) throw DomainError("expert noise must be non-negative");
  config.validate();
  const double m = kWallClearance;
  const SafeCorridor corridor{Box{{0.1 + m, 0.1 + m}, {0.7 + m, 0.3 - m}}, Box{{0.7 + m, 0.1 + m}, {0.9 - m, 0.9 - m}}};
  const std::array<Vec2, 3> waypoints{config.start, Vec2{0.8, 0.2}, config.goal};

  struct Leg {
    Vec2 from;
    Vec2 to;
    double length;
    Vec2 normal;
  };
  std::vector<Leg> legs;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
    const Vec2 a = waypoints[k];
    const Vec2 b = waypoints[k + 1];
    const double len = dist(a, b);
    legs.push_back({a, b, len, {-(b.y - a.y) / len, (b.x - a.x) / len}});
    total += len;
  }

  // Nominal point and leg normal at arc length s.
  struct Nominal {
    Vec2 point;
    Vec2 normal;
  };
  auto nominal_at = [&](double s) {
    for (const auto& leg : legs) {
      if (s <= leg.length) {
        const double f = s / leg.length;
        return Nominal{{leg.from.x + f * (leg.to.x - leg.from.x), leg.from.y + f * (leg.to.y - leg.from.y)}, leg.normal};
      }
      s -= leg.length;
    }
    return Nominal{legs.back().to, legs.back().normal};
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> lateral(0.0, 1.0);
  std::uniform_real_distribution<double> phase_dist(0.0, config.step_size);
  std::vector<Trajectory> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    // A random along-track phase keeps demonstrations from sharing one sample lattice.
    const double phase = noise == 0.0 ? config.step_size : phase_dist(rng);
    std::vector<Vec2> states{config.start};
    for (double s = phase; s < total; s += config.step_size) {
      const auto nom = nominal_at(s);
      // Truncated Gaussian: redraw offsets that leave the corridor.
      Vec2 p = nom.point;
      for (int attempt = 0; noise > 0.0 && attempt < kMaxRedraws; ++attempt) {
        const double offset = noise * lateral(rng);
        const Vec2 candidate{nom.point.x + offset * nom.normal.x, nom.point.y + offset * nom.normal.y};
        if (corridor.contains(candidate)) {
          p = candidate;
          break;
        }
      }
      states.push_back(p);
    }
    states.push_back(config.goal);
    Trajectory traj;
    traj.steps.reserve(states.size());
    for (std::size_t t = 0; t < states.size(); ++t) {
      const Vec2 next = t + 1 < states.size() ? states[t + 1] : states[t];
      traj.steps.push_back({{states[t].x, states[t].y}, {next.x - states[t].x, next.y - states[t].y}});
    }
    out.push_back(std::move(traj));
  }
  return out;
}

}  // namespace treecon::nav
