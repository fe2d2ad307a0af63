#include "ptdrl/nn/checkpoint.hpp"

#include <fstream>
#include <map>

#include "ptdrl/binary_io.hpp"

namespace ptdrl::nn {

void write_checkpoint(std::ostream& os, std::span<const NamedTensor> entries) {
  os.write(kCheckpointMagic, 4);
  io::write_u32(os, kCheckpointVersion);
  io::write_u32(os, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    io::write_u32(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    io::write_u32(os, static_cast<std::uint32_t>(e.tensor.rank()));
    for (auto d : e.tensor.shape()) io::write_u32(os, static_cast<std::uint32_t>(d));
    for (double v : e.tensor.data()) io::write_f64(os, v);
  }
}

std::vector<NamedTensor> read_checkpoint(std::istream& is) {
  io::expect_magic(is, kCheckpointMagic, "checkpoint");
  const auto version = io::read_u32(is);
  if (version != kCheckpointVersion) throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
  const auto count = io::read_u32(is);
  std::vector<NamedTensor> out;
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedTensor e;
    e.name.resize(io::read_u32(is));
    if (!is.read(e.name.data(), static_cast<std::streamsize>(e.name.size()))) {
      throw ConfigError("checkpoint: truncated name");
    }
    Shape shape(io::read_u32(is));
    for (auto& d : shape) d = io::read_u32(is);
    std::vector<double> data(shape_size(shape));
    for (auto& v : data) v = io::read_f64(is);
    e.tensor = Tensor(std::move(shape), std::move(data));
    out.push_back(std::move(e));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, std::span<const Param* const> params) {
  std::vector<NamedTensor> entries;
  for (const auto* p : params) entries.push_back({p->name, p->value});
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeError("cannot write checkpoint " + path.string());
  write_checkpoint(os, entries);
  if (!os) throw RuntimeError("write failed for checkpoint " + path.string());
}

void load_params(std::span<const NamedTensor> entries, std::span<Param* const> params) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e.tensor;
  for (auto* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw ConfigError("checkpoint is missing parameter '" + p->name + "'");
    if (it->second->shape() != p->value.shape()) {
      throw ConfigError("checkpoint parameter '" + p->name + "' has shape " + shape_string(it->second->shape()) +
                        ", architecture declares " + shape_string(p->value.shape()));
    }
  }
  if (by_name.size() != params.size()) throw ConfigError("checkpoint has parameters the architecture does not declare");
  for (auto* p : params) p->mutate() = *by_name.at(p->name);
}

void load_checkpoint(const std::filesystem::path& path, std::span<Param* const> params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint " + path.string());
  const auto entries = read_checkpoint(is);
  load_params(entries, params);
}

}  // namespace ptdrl::nn
