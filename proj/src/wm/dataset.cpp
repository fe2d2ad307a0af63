#include "ptdrl/wm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ptdrl/binary_io.hpp"

namespace ptdrl::wm {

void Dataset::append(std::span<const std::uint8_t> costmap, const WmAction& action, bool episode_start) {
  if (costmap.size() != pixels()) throw ConfigError("dataset: costmap size does not match side");
  costmaps.insert(costmaps.end(), costmap.begin(), costmap.end());
  actions.push_back(action);
  boundary.push_back(episode_start ? 1 : 0);
}

std::size_t Dataset::episodes() const { return static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), 1)); }

std::vector<std::size_t> Dataset::episode_starts() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (boundary[i] || i == 0) out.push_back(i);
  }
  out.push_back(size());
  return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeError("cannot write dataset " + path.string());
  os.write(kDatasetMagic, 4);
  io::write_u32(os, kDatasetVersion);
  io::write_u32(os, static_cast<std::uint32_t>(data.side));
  io::write_u64(os, data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto c = data.costmap(i);
    os.write(reinterpret_cast<const char*>(c.data()), static_cast<std::streamsize>(c.size()));
    for (double a : data.actions[i]) io::write_f64(os, a);
    os.put(static_cast<char>(data.boundary[i]));
  }
  if (!os) throw RuntimeError("write failed for dataset " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open dataset " + path.string());
  io::expect_magic(is, kDatasetMagic, "dataset");
  if (io::read_u32(is) != kDatasetVersion) throw ConfigError(path.string() + ": unsupported dataset version");
  Dataset d;
  d.side = static_cast<int>(io::read_u32(is));
  const std::uint64_t n = io::read_u64(is);
  d.costmaps.resize(n * d.pixels());
  d.actions.resize(n);
  d.boundary.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    is.read(reinterpret_cast<char*>(d.costmaps.data() + i * d.pixels()), static_cast<std::streamsize>(d.pixels()));
    for (double& a : d.actions[i]) a = io::read_f64(is);
    const int b = is.get();
    if (!is) throw ConfigError(path.string() + ": truncated dataset");
    d.boundary[i] = static_cast<std::uint8_t>(b);
  }
  return d;
}

std::pair<Dataset, Dataset> split_episodes(const Dataset& data, double fraction) {
  const auto starts = data.episode_starts();
  const std::size_t n_eps = starts.size() - 1;
  if (n_eps < 2) throw ConfigError("dataset: need at least two episodes to split");
  const std::size_t held = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(fraction * n_eps)), 1, n_eps - 1);
  const std::size_t cut = starts[n_eps - held];
  auto slice = [&](std::size_t lo, std::size_t hi) {
    Dataset d;
    d.side = data.side;
    d.costmaps.assign(data.costmaps.begin() + static_cast<std::ptrdiff_t>(lo * data.pixels()),
                      data.costmaps.begin() + static_cast<std::ptrdiff_t>(hi * data.pixels()));
    d.actions.assign(data.actions.begin() + static_cast<std::ptrdiff_t>(lo), data.actions.begin() + static_cast<std::ptrdiff_t>(hi));
    d.boundary.assign(data.boundary.begin() + static_cast<std::ptrdiff_t>(lo), data.boundary.begin() + static_cast<std::ptrdiff_t>(hi));
    if (!d.boundary.empty()) d.boundary[0] = 1;
    return d;
  };
  return {slice(0, cut), slice(cut, data.size())};
}

}  // namespace ptdrl::wm
