#include "ptdrl/sim/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ptdrl::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher lower envelope of parabolas, one row/column.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[static_cast<std::size_t>(q)] == kInf) continue;
    if (f[static_cast<std::size_t>(v[0])] == kInf) {
      v[0] = q;
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[static_cast<std::size_t>(k)];
      s = ((f[static_cast<std::size_t>(q)] + q * q) - (f[static_cast<std::size_t>(p)] + p * p)) / (2.0 * (q - p));
      if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k + 1)] = kInf;
  }
  if (f[static_cast<std::size_t>(v[0])] == kInf) {
    std::fill(d.begin(), d.end(), kInf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k + 1)] < q) ++k;
    const int p = v[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(q)] = (q - p) * (q - p) + f[static_cast<std::size_t>(p)];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(std::span<const std::uint8_t> mask, int width, int height) {
  std::vector<double> grid(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) grid[i] = mask[i] ? 0.0 : kInf;
  const int n = std::max(width, height);
  std::vector<double> f, d;
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n + 1));
  f.resize(static_cast<std::size_t>(height));
  d.resize(static_cast<std::size_t>(height));
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) f[static_cast<std::size_t>(y)] = grid[static_cast<std::size_t>(y * width + x)];
    edt_1d(f, d, v, z);
    for (int y = 0; y < height; ++y) grid[static_cast<std::size_t>(y * width + x)] = d[static_cast<std::size_t>(y)];
  }
  f.resize(static_cast<std::size_t>(width));
  d.resize(static_cast<std::size_t>(width));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) f[static_cast<std::size_t>(x)] = grid[static_cast<std::size_t>(y * width + x)];
    edt_1d(f, d, v, z);
    for (int x = 0; x < width; ++x) grid[static_cast<std::size_t>(y * width + x)] = d[static_cast<std::size_t>(x)];
  }
  return grid;
}

Vec2 Costmap::cell_center(int ix, int iy) const {
  return {center.x - half_extent() + (ix + 0.5) * resolution, center.y - half_extent() + (iy + 0.5) * resolution};
}

bool Costmap::cell_of(Vec2 p, int& ix, int& iy) const {
  ix = static_cast<int>(std::floor((p.x - (center.x - half_extent())) / resolution));
  iy = static_cast<int>(std::floor((p.y - (center.y - half_extent())) / resolution));
  return ix >= 0 && iy >= 0 && ix < side && iy < side;
}

std::uint8_t Costmap::cost_at(Vec2 p) const {
  int ix = 0, iy = 0;
  return cell_of(p, ix, iy) ? at(ix, iy) : 0;
}

double Costmap::clearance_at(Vec2 p) const {
  int ix = 0, iy = 0;
  return cell_of(p, ix, iy) ? clearance[static_cast<std::size_t>(iy * side + ix)] : kInf;
}

std::vector<double> Costmap::normalized() const {
  std::vector<double> out(cost.size());
  for (std::size_t i = 0; i < cost.size(); ++i) out[i] = cost[i] / 254.0;
  return out;
}

std::uint8_t inflation_cost(double dist, double inflation_radius, const CostmapConfig& cfg) {
  if (dist <= 0.0) return kLethalCost;
  if (dist > inflation_radius) return 0;
  const double c = std::round(253.0 * std::exp(-cfg.decay * (dist - cfg.robot_radius)));
  return static_cast<std::uint8_t>(std::clamp(c, 0.0, 253.0));
}

Costmap build_local_costmap(const StaticMap& map, std::span<const Disc> agents, const Pose& pose,
                            double inflation_radius, const CostmapConfig& cfg) {
  if (inflation_radius < 0.0) throw ConfigError("inflation radius must be non-negative");
  Costmap cm;
  cm.side = cfg.side;
  cm.resolution = cfg.resolution;
  cm.center = pose;
  cm.center.x = std::round(pose.x / cfg.resolution) * cfg.resolution;
  cm.center.y = std::round(pose.y / cfg.resolution) * cfg.resolution;
  const auto n = static_cast<std::size_t>(cfg.side * cfg.side);
  std::vector<std::uint8_t> lethal(n, 0);
  for (int iy = 0; iy < cfg.side; ++iy) {
    for (int ix = 0; ix < cfg.side; ++ix) {
      const Vec2 c = cm.cell_center(ix, iy);
      bool hit = map.occupied_at(c);
      for (const auto& a : agents) {
        if (hit) break;
        hit = (c - a.center).norm() <= a.radius;
      }
      lethal[static_cast<std::size_t>(iy * cfg.side + ix)] = hit ? 1 : 0;
    }
  }
  const auto sq = squared_distance_transform(lethal, cfg.side, cfg.side);
  cm.cost.resize(n);
  cm.clearance.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dist = std::sqrt(sq[i]) * cfg.resolution;
    cm.clearance[i] = dist;
    cm.cost[i] = inflation_cost(dist, inflation_radius, cfg);
  }
  return cm;
}

}  // namespace ptdrl::sim
