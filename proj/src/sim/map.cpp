#include "ptdrl/sim/map.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

namespace ptdrl::sim {

std::string_view to_string(Context c) {
  switch (c) {
    case Context::open: return "open";
    case Context::corridor: return "corridor";
    case Context::curve: return "curve";
    case Context::obstacles: return "obstacles";
  }
  return "open";
}

Context context_from_string(std::string_view s) {
  for (auto c : {Context::open, Context::corridor, Context::curve, Context::obstacles}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("unknown context '" + std::string(s) + "'");
}

StaticMap::StaticMap(double resolution, int width, int height, std::vector<std::uint8_t> occupancy,
                     std::vector<std::int8_t> labels)
    : resolution_(resolution),
      width_(width),
      height_(height),
      occupied_(std::move(occupancy)),
      labels_(std::move(labels)),
      has_labels_(!labels_.empty()) {
  if (!(resolution_ > 0.0)) throw ConfigError("map resolution must be positive");
  if (width_ <= 0 || height_ <= 0) throw ConfigError("map must be non-empty");
  const auto n = static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  if (occupied_.size() != n) throw ConfigError("map occupancy size mismatch");
  if (has_labels_ && labels_.size() != n) throw ConfigError("map label size mismatch");
  for (int x = 0; x < width_; ++x) {
    if (!occupied({x, 0}) || !occupied({x, height_ - 1})) throw ConfigError("map boundary must be occupied");
  }
  for (int y = 0; y < height_; ++y) {
    if (!occupied({0, y}) || !occupied({width_ - 1, y})) throw ConfigError("map boundary must be occupied");
  }
  build_index();
}

Cell StaticMap::cell_of(Vec2 p) const {
  return {static_cast<int>(std::floor(p.x / resolution_)), static_cast<int>(std::floor(p.y / resolution_))};
}

Vec2 StaticMap::center_of(Cell c) const { return {(c.x + 0.5) * resolution_, (c.y + 0.5) * resolution_}; }

bool StaticMap::occupied(Cell c) const {
  if (!in_bounds(c)) return true;
  return occupied_[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x)] != 0;
}

std::optional<Context> StaticMap::label(Cell c) const {
  if (!has_labels_ || !in_bounds(c)) return std::nullopt;
  const auto v = labels_[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x)];
  if (v < 0) return std::nullopt;
  return static_cast<Context>(v);
}

std::optional<Context> StaticMap::nearest_label(Vec2 p) const {
  if (!has_labels_) return std::nullopt;
  Cell start = cell_of(p);
  start.x = std::clamp(start.x, 0, width_ - 1);
  start.y = std::clamp(start.y, 0, height_ - 1);
  std::vector<std::uint8_t> seen(occupied_.size(), 0);
  std::deque<Cell> queue{start};
  auto index = [this](Cell c) { return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x); };
  seen[index(start)] = 1;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    if (auto l = label(c)) return l;
    for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const Cell n{c.x + dx, c.y + dy};
      if (in_bounds(n) && !seen[index(n)]) {
        seen[index(n)] = 1;
        queue.push_back(n);
      }
    }
  }
  return std::nullopt;
}

void StaticMap::build_index() {
  buckets_x_ = static_cast<int>(std::ceil(world_width() / bucket_size_));
  buckets_y_ = static_cast<int>(std::ceil(world_height() / bucket_size_));
  buckets_.assign(static_cast<std::size_t>(buckets_x_ * buckets_y_), {});
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (!occupied({x, y})) continue;
      const bool boundary = !occupied({x + 1, y}) || !occupied({x - 1, y}) || !occupied({x, y + 1}) ||
                            !occupied({x, y - 1});
      if (!boundary) continue;
      const Vec2 c = center_of({x, y});
      const int bx = std::min(buckets_x_ - 1, static_cast<int>(c.x / bucket_size_));
      const int by = std::min(buckets_y_ - 1, static_cast<int>(c.y / bucket_size_));
      buckets_[static_cast<std::size_t>(by * buckets_x_ + bx)].push_back({x, y});
    }
  }
}

ObstacleHit distance_to_cell(const StaticMap& map, Vec2 p, Cell c) {
  const double r = map.resolution();
  const Vec2 closest{std::clamp(p.x, c.x * r, (c.x + 1) * r), std::clamp(p.y, c.y * r, (c.y + 1) * r)};
  return {(p - closest).norm(), closest};
}

template <typename Fn>
void StaticMap::for_boundary_cells_near(Vec2 p, double range, Fn&& fn) const {
  const int reach = static_cast<int>(std::ceil((range + resolution_) / bucket_size_));
  const int bx = static_cast<int>(std::floor(p.x / bucket_size_));
  const int by = static_cast<int>(std::floor(p.y / bucket_size_));
  for (int y = std::max(0, by - reach); y <= std::min(buckets_y_ - 1, by + reach); ++y) {
    for (int x = std::max(0, bx - reach); x <= std::min(buckets_x_ - 1, bx + reach); ++x) {
      for (const Cell& c : buckets_[static_cast<std::size_t>(y * buckets_x_ + x)]) fn(c);
    }
  }
}

std::optional<ObstacleHit> StaticMap::nearest_obstacle(Vec2 p, double max_range) const {
  if (occupied_at(p)) return ObstacleHit{0.0, p};
  const int bx = static_cast<int>(std::floor(p.x / bucket_size_));
  const int by = static_cast<int>(std::floor(p.y / bucket_size_));
  std::optional<ObstacleHit> best;
  const int max_ring = static_cast<int>(std::ceil(max_range / bucket_size_)) + 1;
  for (int ring = 0; ring <= max_ring; ++ring) {
    const double ring_floor = (ring - 1) * bucket_size_ - resolution_;
    if (ring_floor > max_range) break;
    if (best && best->distance <= ring_floor) break;
    for (int y = by - ring; y <= by + ring; ++y) {
      for (int x = bx - ring; x <= bx + ring; ++x) {
        if (std::max(std::abs(x - bx), std::abs(y - by)) != ring) continue;
        if (x < 0 || y < 0 || x >= buckets_x_ || y >= buckets_y_) continue;
        for (const Cell& c : buckets_[static_cast<std::size_t>(y * buckets_x_ + x)]) {
          const auto hit = distance_to_cell(*this, p, c);
          if (!best || hit.distance < best->distance) best = hit;
        }
      }
    }
  }
  if (best && best->distance > max_range) return std::nullopt;
  return best;
}

std::vector<ObstacleHit> StaticMap::nearest_per_sector(Vec2 p, double range, int sectors) const {
  std::vector<std::optional<ObstacleHit>> best(static_cast<std::size_t>(sectors));
  for_boundary_cells_near(p, range, [&](Cell c) {
    const auto hit = distance_to_cell(*this, p, c);
    if (hit.distance > range) return;
    const Vec2 d = hit.point - p;
    double a = std::atan2(d.y, d.x);
    if (a < 0) a += 2.0 * std::numbers::pi;
    auto s = static_cast<std::size_t>(a / (2.0 * std::numbers::pi) * sectors);
    s = std::min(s, static_cast<std::size_t>(sectors - 1));
    if (!best[s] || hit.distance < best[s]->distance) best[s] = hit;
  });
  std::vector<ObstacleHit> out;
  for (const auto& b : best) {
    if (b) out.push_back(*b);
  }
  return out;
}

std::vector<std::uint8_t> StaticMap::inflated(double radius) const {
  std::vector<std::uint8_t> out(occupied_.size(), 0);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const auto i = static_cast<std::size_t>(y * width_ + x);
      if (occupied_[i]) {
        out[i] = 1;
        continue;
      }
      const auto hit = nearest_obstacle(center_of({x, y}), radius);
      out[i] = hit && hit->distance <= radius ? 1 : 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------- text format

namespace {

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

}  // namespace

StaticMap parse_map(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<double> resolution;
  std::optional<bool> labelled;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (rows.empty() && line.rfind("resolution", 0) == 0) {
      try {
        resolution = std::stod(line.substr(10));
      } catch (const std::exception&) {
        throw ConfigError("map: bad resolution line '" + line + "'");
      }
      continue;
    }
    if (rows.empty() && line.rfind("labels", 0) == 0) {
      const std::string v = trim(line.substr(6));
      if (v != "yes" && v != "no") throw ConfigError("map: labels must be yes or no");
      labelled = v == "yes";
      continue;
    }
    rows.push_back(line);
  }
  if (!resolution) throw ConfigError("map: missing 'resolution' header");
  if (!labelled) throw ConfigError("map: missing 'labels' header");
  if (rows.empty()) throw ConfigError("map: no grid rows");
  const int width = static_cast<int>(rows.front().size());
  const int height = static_cast<int>(rows.size());
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(width * height));
  std::vector<std::int8_t> labels(*labelled ? occ.size() : 0, -1);
  for (int r = 0; r < height; ++r) {
    if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != width) {
      throw ConfigError("map: row " + std::to_string(r) + " has inconsistent width");
    }
    const int y = height - 1 - r;
    for (int x = 0; x < width; ++x) {
      const char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(x)];
      const auto i = static_cast<std::size_t>(y * width + x);
      std::int8_t l = -1;
      switch (ch) {
        case '#': occ[i] = 1; break;
        case '.': break;
        case 'O': l = 0; break;
        case 'C': l = 1; break;
        case 'U': l = 2; break;
        case 'B': l = 3; break;
        default: throw ConfigError(std::string("map: unknown cell character '") + ch + "'");
      }
      if (l >= 0) {
        if (!*labelled) throw ConfigError("map: context labels present but header says labels no");
        labels[i] = l;
      }
    }
  }
  return StaticMap(*resolution, width, height, std::move(occ), std::move(labels));
}

StaticMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open map " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_map(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_map(const StaticMap& map) {
  std::ostringstream os;
  os << "resolution " << map.resolution() << "\n";
  os << "labels " << (map.has_labels() ? "yes" : "no") << "\n";
  static constexpr char kLabelChars[] = {'O', 'C', 'U', 'B'};
  for (int y = map.height() - 1; y >= 0; --y) {
    for (int x = 0; x < map.width(); ++x) {
      if (map.occupied({x, y})) {
        os << '#';
      } else if (auto l = map.label({x, y})) {
        os << kLabelChars[static_cast<int>(*l)];
      } else {
        os << '.';
      }
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace ptdrl::sim
