#pragma once

#include <filesystem>
#include <functional>

#include "ptdrl/wm/dataset.hpp"
#include "ptdrl/wm/mdn_rnn.hpp"
#include "ptdrl/wm/vae.hpp"

namespace ptdrl::wm {

/// Costs of records [first, first+count) scaled by 1/254, as a [count x pixels] batch.
nn::Tensor costmap_batch(const Dataset& data, std::span<const std::size_t> indices);

struct VaeTrainConfig {
  int epochs = 5;
  std::size_t batch = 64;
  double lr = 1e-3;
  double grad_clip = 0.0;  // 0 disables clipping
  std::uint64_t seed = 0;
};

/// Minibatch Adam on the VAE loss; returns the per-batch loss sequence.
std::vector<double> train_vae(Vae& vae, const Dataset& data, const VaeTrainConfig& cfg,
                              const std::function<void(int, std::size_t, const VaeLoss&)>& on_batch = {});

struct VaeEval {
  double mse = 0.0;              // per pixel, reconstruction from z = mu
  double centroid_error = 0.0;   // mean lethal-centroid displacement in cells, over maps with lethal cells
  std::size_t samples = 0;
};

/// Evaluates up to `max_samples` records spread evenly over the dataset (0: all).
VaeEval evaluate_vae(const Vae& vae, const Dataset& data, std::size_t max_samples = 0);

/// Centroid (x, y in cells) of pixels >= threshold, or nullopt when there are none.
std::optional<Vec2> blob_centroid(std::span<const double> pixels, int side, double threshold);

/// z = mu for every record, [size x latent].
nn::Tensor encode_dataset(const Vae& vae, const Dataset& data);

struct RnnTrainConfig {
  int epochs = 10;
  std::size_t streams = 32;   // parallel sequences per batch
  std::size_t seq_len = 32;   // truncated backprop length
  double lr = 1e-3;
  double grad_clip = 1.0;
  std::uint64_t seed = 0;
};

/// Stateful truncated BPTT over episode streams; returns per-chunk mean NLL.
std::vector<double> train_rnn(MdnRnn& rnn, const nn::Tensor& latents, const Dataset& data, const RnnTrainConfig& cfg,
                              const std::function<void(int, std::size_t, double)>& on_chunk = {});

struct RnnEval {
  double model_nll = 0.0;        // mean per transition
  double persistence_nll = 0.0;  // unit Gaussian centred at z_t
  std::size_t transitions = 0;
};

RnnEval evaluate_rnn(const MdnRnn& rnn, const nn::Tensor& latents, const Dataset& data);

void save_vae(const std::filesystem::path& path, const Vae& vae);
Vae load_vae(const std::filesystem::path& path);
void save_rnn(const std::filesystem::path& path, const MdnRnn& rnn);
MdnRnn load_rnn(const std::filesystem::path& path);

}  // namespace ptdrl::wm
