#include "ptdrl/wm/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ptdrl/json_util.hpp"
#include "ptdrl/nn/checkpoint.hpp"
#include "ptdrl/nn/optim.hpp"

namespace ptdrl::wm {

using nn::Tensor;

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

// One row per stream: the concatenated tick indices of its episodes.
std::vector<std::vector<std::size_t>> make_streams(const Dataset& data, std::size_t n_streams, Rng* rng) {
  const auto starts = data.episode_starts();
  std::vector<std::size_t> order(starts.size() - 1);
  std::iota(order.begin(), order.end(), 0);
  if (rng) shuffle(order, *rng);
  n_streams = std::max<std::size_t>(1, std::min(n_streams, order.size()));
  std::vector<std::vector<std::size_t>> streams(n_streams);
  const std::size_t target = (data.size() + n_streams - 1) / n_streams;
  std::size_t s = 0;
  for (std::size_t e : order) {
    if (streams[s].size() >= target && s + 1 < n_streams) ++s;
    for (std::size_t i = starts[e]; i < starts[e + 1]; ++i) streams[s].push_back(i);
  }
  return streams;
}

bool has_successor(const Dataset& data, std::size_t i) { return i + 1 < data.size() && !data.boundary[i + 1]; }

SequenceChunk make_chunk(const Dataset& data, const Tensor& latents, const std::vector<std::vector<std::size_t>>& streams,
                         std::size_t offset, std::size_t len) {
  const std::size_t b_n = streams.size(), d = latents.cols();
  SequenceChunk c;
  for (std::size_t t = 0; t < len; ++t) {
    Tensor in({b_n, d + 3}), tgt({b_n, d});
    std::vector<std::uint8_t> reset(b_n, 0);
    std::vector<double> w(b_n, 0.0);
    for (std::size_t b = 0; b < b_n; ++b) {
      const std::size_t pos = offset + t;
      if (pos >= streams[b].size()) {
        reset[b] = 1;
        continue;
      }
      const std::size_t i = streams[b][pos];
      for (std::size_t j = 0; j < d; ++j) in.at(b, j) = latents.at(i, j);
      for (std::size_t j = 0; j < 3; ++j) in.at(b, d + j) = data.actions[i][j];
      reset[b] = data.boundary[i] || pos == 0;
      if (has_successor(data, i)) {
        for (std::size_t j = 0; j < d; ++j) tgt.at(b, j) = latents.at(i + 1, j);
        w[b] = 1.0;
      }
    }
    c.inputs.push_back(std::move(in));
    c.targets.push_back(std::move(tgt));
    c.reset.push_back(std::move(reset));
    c.weight.push_back(std::move(w));
  }
  return c;
}

std::size_t longest(const std::vector<std::vector<std::size_t>>& streams) {
  std::size_t m = 0;
  for (const auto& s : streams) m = std::max(m, s.size());
  return m;
}

void write_json(const std::filesystem::path& path, const json_util::Json& j) {
  std::ofstream os(path);
  if (!os) throw RuntimeError("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

}  // namespace

Tensor costmap_batch(const Dataset& data, std::span<const std::size_t> indices) {
  const std::size_t n = data.pixels();
  Tensor x({indices.size(), n});
  auto& v = x.storage();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto c = data.costmap(indices[r]);
    for (std::size_t j = 0; j < n; ++j) v[r * n + j] = c[j] / 254.0;
  }
  return x;
}

std::vector<double> train_vae(Vae& vae, const Dataset& data, const VaeTrainConfig& cfg,
                              const std::function<void(int, std::size_t, const VaeLoss&)>& on_batch) {
  if (data.size() == 0) throw ConfigError("train_vae: empty dataset");
  if (static_cast<std::size_t>(data.side) != vae.config().input_side) throw ConfigError("train_vae: costmap side mismatch");
  Rng rng(mix_seed(cfg.seed, 0x5641));
  auto params = vae.params();
  auto adam = nn::make_adam_state(params, {cfg.lr});
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> losses;
  const std::size_t latent = vae.config().latent;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch, ++b) {
      const std::size_t n = std::min(cfg.batch, order.size() - start);
      const Tensor x = costmap_batch(data, std::span(order).subspan(start, n));
      Tensor eps({n, latent});
      for (auto& e : eps.storage()) e = gaussian(rng);
      nn::zero_grads(params);
      const VaeLoss l = vae.loss(x, eps, true);
      if (cfg.grad_clip > 0) nn::clip_grad_norm(params, cfg.grad_clip);
      nn::adam_step(params, adam);
      losses.push_back(l.total);
      if (on_batch) on_batch(epoch, b, l);
    }
  }
  return losses;
}

std::optional<Vec2> blob_centroid(std::span<const double> pixels, int side, double threshold) {
  double sx = 0, sy = 0, n = 0;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      if (pixels[static_cast<std::size_t>(y * side + x)] < threshold) continue;
      sx += x;
      sy += y;
      n += 1;
    }
  }
  if (n == 0) return std::nullopt;
  return Vec2{sx / n, sy / n};
}

VaeEval evaluate_vae(const Vae& vae, const Dataset& data, std::size_t max_samples) {
  std::vector<std::size_t> idx;
  const std::size_t n = max_samples == 0 ? data.size() : std::min(max_samples, data.size());
  for (std::size_t i = 0; i < n; ++i) idx.push_back(i * data.size() / n);
  VaeEval out;
  double se = 0.0, cerr = 0.0;
  std::size_t blobs = 0;
  const std::size_t px = data.pixels();
  for (std::size_t start = 0; start < idx.size(); start += 256) {
    const std::size_t m = std::min<std::size_t>(256, idx.size() - start);
    const Tensor x = costmap_batch(data, std::span(idx).subspan(start, m));
    const Tensor r = vae.decode(vae.latent(x));
    for (std::size_t i = 0; i < x.size(); ++i) se += (r[i] - x[i]) * (r[i] - x[i]);
    for (std::size_t b = 0; b < m; ++b) {
      const auto want = blob_centroid(x.data().subspan(b * px, px), data.side, 1.0);
      if (!want) continue;
      const auto got = blob_centroid(r.data().subspan(b * px, px), data.side, 0.5);
      cerr += got ? (*got - *want).norm() : static_cast<double>(data.side);
      ++blobs;
    }
  }
  out.samples = idx.size();
  out.mse = se / static_cast<double>(idx.size() * px);
  out.centroid_error = blobs ? cerr / static_cast<double>(blobs) : 0.0;
  return out;
}

Tensor encode_dataset(const Vae& vae, const Dataset& data) {
  const std::size_t l = vae.config().latent;
  Tensor out({data.size(), l});
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += 256) {
    const std::size_t m = std::min<std::size_t>(256, data.size() - start);
    idx.resize(m);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor z = vae.latent(costmap_batch(data, idx));
    std::copy(z.storage().begin(), z.storage().end(), out.storage().begin() + static_cast<std::ptrdiff_t>(start * l));
  }
  return out;
}

std::vector<double> train_rnn(MdnRnn& rnn, const Tensor& latents, const Dataset& data, const RnnTrainConfig& cfg,
                              const std::function<void(int, std::size_t, double)>& on_chunk) {
  if (latents.rows() != data.size() || latents.cols() != rnn.config().latent) {
    throw ConfigError("train_rnn: latents do not match the dataset");
  }
  Rng rng(mix_seed(cfg.seed, 0x524e));
  auto params = rnn.params();
  auto adam = nn::make_adam_state(params, {cfg.lr});
  std::vector<double> losses;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto streams = make_streams(data, cfg.streams, &rng);
    auto state = rnn.initial_state(streams.size());
    const std::size_t total = longest(streams);
    for (std::size_t off = 0, k = 0; off < total; off += cfg.seq_len, ++k) {
      const auto chunk = make_chunk(data, latents, streams, off, std::min(cfg.seq_len, total - off));
      nn::zero_grads(params);
      const double l = rnn.chunk_loss(chunk, state, true);
      if (cfg.grad_clip > 0) nn::clip_grad_norm(params, cfg.grad_clip);
      nn::adam_step(params, adam);
      losses.push_back(l);
      if (on_chunk) on_chunk(epoch, k, l);
    }
  }
  return losses;
}

RnnEval evaluate_rnn(const MdnRnn& rnn_in, const Tensor& latents, const Dataset& data) {
  MdnRnn rnn = rnn_in;
  const auto streams = make_streams(data, 16, nullptr);
  auto state = rnn.initial_state(streams.size());
  const std::size_t total = longest(streams);
  RnnEval out;
  double model = 0.0, persist = 0.0;
  for (std::size_t off = 0; off < total; off += 64) {
    const auto chunk = make_chunk(data, latents, streams, off, std::min<std::size_t>(64, total - off));
    double w = 0.0;
    for (const auto& row : chunk.weight)
      for (double x : row) w += x;
    model += rnn.chunk_loss(chunk, state, false) * w;
    for (std::size_t t = 0; t < chunk.inputs.size(); ++t) {
      const std::size_t d = latents.cols();
      Tensor prev({chunk.inputs[t].rows(), d});
      for (std::size_t b = 0; b < prev.rows(); ++b)
        for (std::size_t j = 0; j < d; ++j) prev.at(b, j) = chunk.inputs[t].at(b, j);
      const auto p = persistence_nll(prev, chunk.targets[t]);
      for (std::size_t b = 0; b < p.size(); ++b) persist += chunk.weight[t][b] * p[b];
    }
    out.transitions += static_cast<std::size_t>(w);
  }
  if (out.transitions == 0) throw ConfigError("evaluate_rnn: no transitions");
  out.model_nll = model / static_cast<double>(out.transitions);
  out.persistence_nll = persist / static_cast<double>(out.transitions);
  return out;
}

void save_vae(const std::filesystem::path& path, const Vae& vae) {
  const auto& c = vae.config();
  write_json(sidecar(path), {{"input_side", c.input_side}, {"hidden", c.hidden}, {"latent", c.latent},
                             {"beta", c.beta}, {"conv_encoder", c.conv_encoder}});
  nn::save_checkpoint(path, vae.params());
}

Vae load_vae(const std::filesystem::path& path) {
  const auto j = json_util::load(sidecar(path));
  json_util::check_keys(j, "vae config", {"input_side", "hidden", "latent", "beta", "conv_encoder"});
  VaeConfig c;
  c.input_side = json_util::get<std::size_t>(j, "input_side", "vae config");
  c.hidden = json_util::get<std::vector<std::size_t>>(j, "hidden", "vae config");
  c.latent = json_util::get<std::size_t>(j, "latent", "vae config");
  c.beta = json_util::get<double>(j, "beta", "vae config");
  c.conv_encoder = json_util::get<bool>(j, "conv_encoder", "vae config");
  Vae vae(c);
  nn::load_checkpoint(path, vae.params());
  return vae;
}

void save_rnn(const std::filesystem::path& path, const MdnRnn& rnn) {
  const auto& c = rnn.config();
  write_json(sidecar(path),
             {{"latent", c.latent}, {"action", c.action}, {"hidden", c.hidden}, {"components", c.components}});
  nn::save_checkpoint(path, rnn.params());
}

MdnRnn load_rnn(const std::filesystem::path& path) {
  const auto j = json_util::load(sidecar(path));
  json_util::check_keys(j, "rnn config", {"latent", "action", "hidden", "components"});
  MdnRnnConfig c;
  c.latent = json_util::get<std::size_t>(j, "latent", "rnn config");
  c.action = json_util::get<std::size_t>(j, "action", "rnn config");
  c.hidden = json_util::get<std::size_t>(j, "hidden", "rnn config");
  c.components = json_util::get<std::size_t>(j, "components", "rnn config");
  MdnRnn rnn(c);
  nn::load_checkpoint(path, rnn.params());
  return rnn;
}

}  // namespace ptdrl::wm
