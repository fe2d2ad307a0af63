#include "ptdrl/planner/global.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "ptdrl/sim/costmap.hpp"

namespace ptdrl::planner {

namespace {

struct Node {
  double f;
  int index;
  bool operator>(const Node& o) const { return f > o.f || (f == o.f && index > o.index); }
};

std::vector<int> astar(const std::vector<std::uint8_t>& blocked, const std::vector<double>& penalty, int w, int h,
                       int start, int goal) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(blocked.size(), inf);
  std::vector<int> parent(blocked.size(), -1);
  std::vector<std::uint8_t> closed(blocked.size(), 0);
  const int gx = goal % w, gy = goal / w;
  auto heuristic = [&](int i) {
    const int dx = std::abs(i % w - gx), dy = std::abs(i / w - gy);
    return (std::max(dx, dy) - std::min(dx, dy)) + std::sqrt(2.0) * std::min(dx, dy);
  };
  std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
  g[static_cast<std::size_t>(start)] = 0.0;
  open.push({heuristic(start), start});
  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!open.empty()) {
    const Node n = open.top();
    open.pop();
    const auto ni = static_cast<std::size_t>(n.index);
    if (closed[ni]) continue;
    closed[ni] = 1;
    if (n.index == goal) break;
    const int x = n.index % w, y = n.index / w;
    for (int k = 0; k < 8; ++k) {
      const int nx = x + kDx[k], ny = y + kDy[k];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      const int j = ny * w + nx;
      const auto jj = static_cast<std::size_t>(j);
      if (blocked[jj] || closed[jj]) continue;
      // No corner cutting past blocked cells.
      if (k >= 4 && (blocked[static_cast<std::size_t>(y * w + nx)] || blocked[static_cast<std::size_t>(ny * w + x)])) continue;
      const double step = (k < 4 ? 1.0 : std::sqrt(2.0)) * (1.0 + 0.5 * (penalty[ni] + penalty[jj]));
      if (g[ni] + step < g[jj]) {
        g[jj] = g[ni] + step;
        parent[jj] = n.index;
        open.push({g[jj] + heuristic(j), j});
      }
    }
  }
  if (!closed[static_cast<std::size_t>(goal)]) return {};
  std::vector<int> path;
  for (int i = goal; i != -1; i = parent[static_cast<std::size_t>(i)]) path.push_back(i);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

double path_length(Vec2 start, const std::vector<Vec2>& waypoints) {
  double len = 0.0;
  Vec2 prev = start;
  for (const auto& w : waypoints) {
    len += (w - prev).norm();
    prev = w;
  }
  return len;
}

std::vector<Vec2> plan_global(const sim::StaticMap& map, Vec2 start, Vec2 goal, const GlobalPlannerConfig& cfg) {
  if (map.occupied_at(start) || map.occupied_at(goal)) throw PlanningError("plan_global: start or goal is occupied");
  if ((goal - start).norm() < 1e-9) return {goal};

  const int w = map.width(), h = map.height();
  const sim::Cell sc = map.cell_of(start), gc = map.cell_of(goal);
  const int start_i = sc.y * w + sc.x, goal_i = gc.y * w + gc.x;

  const auto sq = sim::squared_distance_transform(map.occupancy(), w, h);
  std::vector<double> penalty(sq.size(), 0.0);
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double clear = std::sqrt(sq[i]) * map.resolution();
    if (cfg.soft_range > 0 && clear < cfg.soft_range) penalty[i] = cfg.soft_weight * (cfg.soft_range - clear) / cfg.soft_range;
  }

  // Shrink the hard inflation until start and goal are outside it.
  std::vector<int> cells;
  for (double r = cfg.clearance;; r = std::max(cfg.min_clearance, r - 0.05)) {
    auto blocked = map.inflated(r);
    blocked[static_cast<std::size_t>(start_i)] = 0;
    blocked[static_cast<std::size_t>(goal_i)] = 0;
    cells = astar(blocked, penalty, w, h, start_i, goal_i);
    if (!cells.empty() || r <= cfg.min_clearance) break;
  }
  if (cells.empty()) throw PlanningError("plan_global: goal unreachable");

  std::vector<Vec2> dense{start};
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) dense.push_back(map.center_of({cells[i] % w, cells[i] / w}));
  dense.push_back(goal);

  std::vector<Vec2> out;
  double since = 0.0;
  for (std::size_t i = 1; i < dense.size(); ++i) {
    since += (dense[i] - dense[i - 1]).norm();
    if (i + 1 == dense.size()) {
      out.push_back(goal);
    } else if (since >= cfg.waypoint_spacing - 1e-9) {
      out.push_back(dense[i]);
      since = 0.0;
    }
  }
  return out;
}

}  // namespace ptdrl::planner
