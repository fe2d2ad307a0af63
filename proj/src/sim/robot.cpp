#include "ptdrl/sim/robot.hpp"

#include <algorithm>
#include <cmath>

namespace ptdrl::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Signed clearance of the footprint: negative when overlapping.
double signed_clearance(const StaticMap& map, std::span<const Disc> agents, Vec2 p, const RobotConfig& cfg) {
  double best = kInf;
  if (auto hit = map.nearest_obstacle(p, cfg.obstacle_search + cfg.radius)) {
    best = hit->distance - cfg.radius;
    if (hit->distance == 0.0) best = -cfg.radius;
  }
  for (const auto& a : agents) best = std::min(best, (p - a.center).norm() - a.radius - cfg.radius);
  return best;
}

}  // namespace

double min_obstacle_distance(const StaticMap& map, std::span<const Disc> agents, const Pose& pose,
                             const RobotConfig& cfg) {
  const double c = signed_clearance(map, agents, pose.position(), cfg);
  if (c > cfg.obstacle_search) return kInf;
  return std::max(0.0, c);
}

StepResult step_robot(const StaticMap& map, std::span<const Disc> agents, const RobotState& state,
                      const VelocityCmd& cmd, double dt, const RobotConfig& cfg) {
  if (!(dt > 0.0)) throw ConfigError("step_robot: dt must be positive");
  const Pose& start = state.pose;
  const Pose target{start.x + cmd.linear * std::cos(start.heading) * dt,
                    start.y + cmd.linear * std::sin(start.heading) * dt,
                    normalize_angle(start.heading + cmd.angular * dt)};
  const double travel = std::abs(cmd.linear) * dt;
  const double turn = cmd.angular * dt;
  auto at_fraction = [&](double s) {
    return Pose{start.x + (target.x - start.x) * s, start.y + (target.y - start.y) * s,
                normalize_angle(start.heading + turn * s)};
  };

  StepResult result{{target, cmd}, false};
  if (travel == 0.0) return result;

  const int n = std::max(1, static_cast<int>(std::ceil(travel / cfg.substep)));
  double prev_s = 0.0;
  double prev_clear = signed_clearance(map, agents, start.position(), cfg);
  for (int k = 1; k <= n; ++k) {
    const double s = static_cast<double>(k) / n;
    const double c = signed_clearance(map, agents, at_fraction(s).position(), cfg);
    const double floor = std::min(0.0, prev_clear);
    if (c < floor) {
      double lo = prev_s, hi = s;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (signed_clearance(map, agents, at_fraction(mid).position(), cfg) >= floor) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      // A disc turns freely; only the translation stops at contact.
      result.state.pose = at_fraction(lo);
      result.state.pose.heading = target.heading;
      result.collision = true;
      return result;
    }
    prev_s = s;
    prev_clear = c;
  }
  return result;
}

double ray_disc_distance(Vec2 origin, Vec2 dir, const Disc& disc) {
  const Vec2 oc = origin - disc.center;
  const double b = oc.dot(dir);
  const double c = oc.dot(oc) - disc.radius * disc.radius;
  if (c <= 0.0) return 0.0;
  const double disc_term = b * b - c;
  if (disc_term < 0.0) return kInf;
  const double t = -b - std::sqrt(disc_term);
  return t >= 0.0 ? t : kInf;
}

std::vector<double> raycast_lidar(const StaticMap& map, std::span<const Disc> agents, const Pose& pose, int n_beams,
                                  double max_range) {
  if (n_beams < 1) throw ConfigError("raycast_lidar: need at least one beam");
  if (map.occupied_at(pose.position())) throw InvalidPoseError("lidar pose lies inside an obstacle");
  std::vector<double> ranges(static_cast<std::size_t>(n_beams), max_range);
  const double res = map.resolution();
  for (int b = 0; b < n_beams; ++b) {
    const double a = pose.heading + 2.0 * std::numbers::pi * b / n_beams;
    const Vec2 dir{std::cos(a), std::sin(a)};
    // Amanatides-Woo traversal of the occupancy grid.
    Cell cell = map.cell_of(pose.position());
    const int step_x = dir.x > 0 ? 1 : -1;
    const int step_y = dir.y > 0 ? 1 : -1;
    const double next_x = (cell.x + (step_x > 0 ? 1 : 0)) * res;
    const double next_y = (cell.y + (step_y > 0 ? 1 : 0)) * res;
    double t_max_x = std::abs(dir.x) > 1e-12 ? (next_x - pose.x) / dir.x : kInf;
    double t_max_y = std::abs(dir.y) > 1e-12 ? (next_y - pose.y) / dir.y : kInf;
    const double t_delta_x = std::abs(dir.x) > 1e-12 ? res / std::abs(dir.x) : kInf;
    const double t_delta_y = std::abs(dir.y) > 1e-12 ? res / std::abs(dir.y) : kInf;
    double hit = kInf;
    while (true) {
      double t = 0.0;
      if (t_max_x < t_max_y) {
        t = t_max_x;
        t_max_x += t_delta_x;
        cell.x += step_x;
      } else {
        t = t_max_y;
        t_max_y += t_delta_y;
        cell.y += step_y;
      }
      if (t > max_range) break;
      if (map.occupied(cell)) {
        hit = t;
        break;
      }
    }
    for (const auto& ag : agents) hit = std::min(hit, ray_disc_distance(pose.position(), dir, ag));
    ranges[static_cast<std::size_t>(b)] = std::min(hit, max_range);
  }
  return ranges;
}

}  // namespace ptdrl::sim
