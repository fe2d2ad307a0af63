#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ptdrl/nn/layers.hpp"

namespace ptdrl::nn {

inline constexpr char kCheckpointMagic[4] = {'P', 'T', 'N', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Layout: "PTNN", u32 version, u32 count, then per entry
// u32 name length, name bytes, u32 rank, u32 dims..., f64 data (all little-endian).
void write_checkpoint(std::ostream& os, std::span<const NamedTensor> entries);
std::vector<NamedTensor> read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, std::span<const Param* const> params);
/// Loads by name; every declared parameter must be present with an identical shape.
void load_checkpoint(const std::filesystem::path& path, std::span<Param* const> params);
void load_params(std::span<const NamedTensor> entries, std::span<Param* const> params);

}  // namespace ptdrl::nn
