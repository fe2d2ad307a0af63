#include "ptdrl/peds/social_force.hpp"

#include <algorithm>
#include <cmath>

namespace ptdrl::peds {

void SocialForceParams::validate() const {
  if (!(relaxation_time > 0 && repulsion_strength > 0 && repulsion_range > 0 && wall_strength > 0 &&
        wall_range > 0)) {
    throw ConfigError("social force parameters must be strictly positive");
  }
  if (!(speed_cap_factor >= 1.0) || wall_sectors < 1) throw ConfigError("invalid social force limits");
}

namespace {

Vec2 random_unit(Rng& rng) {
  const double a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  return {std::cos(a), std::sin(a)};
}

Vec2 disc_repulsion(Vec2 self, double self_radius, const sim::Disc& other, const SocialForceParams& p, Rng& rng) {
  const Vec2 diff = self - other.center;
  const double d = diff.norm();
  const double r = self_radius + other.radius;
  if (d == 0.0) return random_unit(rng) * (p.repulsion_strength * std::exp(r / p.repulsion_range));
  return diff * (p.repulsion_strength * std::exp((r - d) / p.repulsion_range) / d);
}

bool clear_of_walls(const sim::StaticMap& map, Vec2 p, double radius) {
  const auto hit = map.nearest_obstacle(p, radius + map.resolution());
  return !hit || hit->distance >= radius;
}

}  // namespace

Vec2 social_force(std::span<const Agent> agents, std::size_t index, const std::optional<sim::Disc>& robot,
                  const sim::StaticMap& map, const SocialForceParams& params, Rng& rng) {
  const Agent& a = agents[index];
  Vec2 desired{};
  const Vec2 to_goal = a.goal() - a.position;
  if (const double n = to_goal.norm(); n > 1e-9) desired = to_goal * (a.desired_speed / n);
  Vec2 force = (desired - a.velocity) * (1.0 / params.relaxation_time);

  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (j == index) continue;
    force += disc_repulsion(a.position, a.radius, agents[j].disc(), params, rng);
  }
  if (robot) force += disc_repulsion(a.position, a.radius, *robot, params, rng);

  for (const auto& wall : map.nearest_per_sector(a.position, params.wall_search, params.wall_sectors)) {
    const Vec2 diff = a.position - wall.point;
    const double d = diff.norm();
    if (d <= 1e-12) continue;
    force += diff * (params.wall_strength * std::exp((a.radius - d) / params.wall_range) / d);
  }
  return force;
}

void step_agents(std::vector<Agent>& agents, const std::optional<sim::Disc>& robot, const sim::StaticMap& map,
                 const SocialForceParams& params, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw ConfigError("step_agents: dt must be positive");
  std::vector<Vec2> forces(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) forces[i] = social_force(agents, i, robot, map, params, rng);

  for (std::size_t i = 0; i < agents.size(); ++i) {
    Agent& a = agents[i];
    a.velocity += forces[i] * dt;
    const double cap = params.speed_cap_factor * a.desired_speed;
    if (const double s = a.velocity.norm(); s > cap) a.velocity = a.velocity * (cap / s);

    const Vec2 step = a.velocity * dt;
    const Vec2 full = a.position + step;
    if (clear_of_walls(map, full, a.radius)) {
      a.position = full;
    } else if (const Vec2 px{a.position.x + step.x, a.position.y}; clear_of_walls(map, px, a.radius)) {
      a.position = px;
      a.velocity.y = 0.0;
    } else if (const Vec2 py{a.position.x, a.position.y + step.y}; clear_of_walls(map, py, a.radius)) {
      a.position = py;
      a.velocity.x = 0.0;
    } else {
      a.velocity = {};
    }
  }

  // Hard separation between discs; the robot does not yield.
  for (int iter = 0; iter < 3; ++iter) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      for (std::size_t j = i + 1; j < agents.size(); ++j) {
        Vec2 diff = agents[i].position - agents[j].position;
        double d = diff.norm();
        const double overlap = agents[i].radius + agents[j].radius - d;
        if (overlap <= 0.0) continue;
        const Vec2 n = d > 1e-12 ? diff * (1.0 / d) : random_unit(rng);
        const Vec2 pi = agents[i].position + n * (0.5 * overlap);
        const Vec2 pj = agents[j].position - n * (0.5 * overlap);
        if (clear_of_walls(map, pi, agents[i].radius)) agents[i].position = pi;
        if (clear_of_walls(map, pj, agents[j].radius)) agents[j].position = pj;
      }
    }
    if (robot) {
      for (auto& a : agents) {
        const Vec2 diff = a.position - robot->center;
        const double d = diff.norm();
        const double overlap = a.radius + robot->radius - d;
        if (overlap <= 0.0) continue;
        const Vec2 n = d > 1e-12 ? diff * (1.0 / d) : random_unit(rng);
        const Vec2 p = a.position + n * (overlap + 1e-6);
        if (clear_of_walls(map, p, a.radius)) {
          a.position = p;
          const double vn = a.velocity.dot(n);
          if (vn < 0) a.velocity = a.velocity - n * vn;
        }
      }
    }
  }

  for (auto& a : agents) {
    if (a.waypoints.empty()) continue;
    if ((a.goal() - a.position).norm() < params.waypoint_tolerance) {
      a.next_waypoint = (a.next_waypoint + 1) % a.waypoints.size();
    }
  }
}

std::vector<sim::Disc> discs(std::span<const Agent> agents) {
  std::vector<sim::Disc> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back(a.disc());
  return out;
}

}  // namespace ptdrl::peds
