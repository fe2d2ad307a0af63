#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptdrl/common.hpp"

namespace ptdrl::sim {

/// Navigation context taxonomy used for evaluation bucketing.
enum class Context : std::uint8_t { open = 0, corridor = 1, curve = 2, obstacles = 3 };
inline constexpr std::size_t kNumContexts = 4;

std::string_view to_string(Context c);
Context context_from_string(std::string_view s);

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

/// A disc obstacle (pedestrian, or the robot as seen by pedestrians).
struct Disc {
  Vec2 center;
  double radius = 0.0;
};

/// Closest point on the static map to a query, and its distance.
struct ObstacleHit {
  double distance = 0.0;
  Vec2 point;
};

/// Occupancy grid with optional per-cell context labels. Cell (0,0) is the
/// bottom-left corner of the world at the origin; the first text row is the top.
class StaticMap {
 public:
  StaticMap() = default;
  /// Cells indexed y * width + x with y = 0 at the bottom. `labels` (-1 = none) may be empty.
  StaticMap(double resolution, int width, int height, std::vector<std::uint8_t> occupied,
            std::vector<std::int8_t> labels);

  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  bool has_labels() const { return has_labels_; }
  double world_width() const { return width_ * resolution_; }
  double world_height() const { return height_ * resolution_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  Cell cell_of(Vec2 p) const;
  Vec2 center_of(Cell c) const;
  /// Out-of-bounds cells count as occupied.
  bool occupied(Cell c) const;
  bool occupied_at(Vec2 p) const { return occupied(cell_of(p)); }
  /// Label of the cell, if annotated.
  std::optional<Context> label(Cell c) const;
  /// Label of the nearest annotated cell (breadth-first over cells).
  std::optional<Context> nearest_label(Vec2 p) const;

  /// Distance from p to the nearest occupied cell square, searching up to max_range.
  std::optional<ObstacleHit> nearest_obstacle(Vec2 p, double max_range) const;
  /// Nearest occupied point in each of `sectors` angular sectors around p within range.
  std::vector<ObstacleHit> nearest_per_sector(Vec2 p, double range, int sectors) const;

  /// Occupancy grown by `radius` metres (cell centres within radius of an occupied square).
  std::vector<std::uint8_t> inflated(double radius) const;

  const std::vector<std::uint8_t>& occupancy() const { return occupied_; }

 private:
  void build_index();
  template <typename Fn>
  void for_boundary_cells_near(Vec2 p, double range, Fn&& fn) const;

  double resolution_ = 0.1;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> occupied_;
  std::vector<std::int8_t> labels_;
  bool has_labels_ = false;

  // Occupied cells adjacent to free space, bucketed on a coarse grid.
  double bucket_size_ = 1.0;
  int buckets_x_ = 0;
  int buckets_y_ = 0;
  std::vector<std::vector<Cell>> buckets_;
};

/// Distance from p to an axis-aligned square cell, and the closest point on it.
ObstacleHit distance_to_cell(const StaticMap& map, Vec2 p, Cell c);

/// Parses the plain-text map format (`resolution <f>`, `labels <yes|no>`, grid rows).
StaticMap parse_map(std::string_view text);
StaticMap load_map(const std::filesystem::path& path);
std::string format_map(const StaticMap& map);

}  // namespace ptdrl::sim
