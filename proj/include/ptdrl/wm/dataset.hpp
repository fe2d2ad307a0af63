#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ptdrl/common.hpp"

namespace ptdrl::wm {

inline constexpr char kDatasetMagic[4] = {'P', 'T', 'W', 'M'};
inline constexpr std::uint32_t kDatasetVersion = 1;

/// Executed action fed to the world model: linear, angular, inflation radius.
using WmAction = std::array<double, 3>;

/// Sequence of ticks. `boundary[i]` marks the first tick of an episode.
struct Dataset {
  int side = 64;
  std::vector<std::uint8_t> costmaps;  // size() * side * side
  std::vector<WmAction> actions;
  std::vector<std::uint8_t> boundary;

  std::size_t size() const { return actions.size(); }
  std::size_t pixels() const { return static_cast<std::size_t>(side * side); }
  std::span<const std::uint8_t> costmap(std::size_t i) const { return {costmaps.data() + i * pixels(), pixels()}; }
  void append(std::span<const std::uint8_t> costmap, const WmAction& action, bool episode_start);
  std::size_t episodes() const;
  /// Start index of every episode, plus size() at the end.
  std::vector<std::size_t> episode_starts() const;
};

// Layout: "PTWM", u32 version, u32 side, u64 count, then per record
// side*side u8 costs, 3 x f64 action, u8 boundary flag (little-endian).
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

/// Splits whole episodes: the trailing `fraction` of episodes (at least one) become the held-out part.
std::pair<Dataset, Dataset> split_episodes(const Dataset& data, double fraction);

}  // namespace ptdrl::wm
