#pragma once

#include <optional>
#include <vector>

#include "ptdrl/nn/layers.hpp"

namespace ptdrl::wm {

struct VaeConfig {
  std::size_t input_side = 64;              // square costmap, flattened
  std::vector<std::size_t> hidden{1024, 256};
  std::size_t latent = 64;
  double beta = 1.0;
  bool conv_encoder = false;                // two stride-2 convolutions ahead of the dense encoder

  std::size_t input() const { return input_side * input_side; }
};

struct VaeEncoding {
  nn::Tensor mu;      // [batch x latent]
  nn::Tensor logvar;  // [batch x latent]
};

struct VaeLoss {
  double total = 0.0;  // per-sample mean of bce + beta * kl
  double bce = 0.0;
  double kl = 0.0;
};

/// Binary cross-entropy summed over pixels plus beta * KL(N(mu, exp(logvar)) || N(0, I)),
/// summed over the batch. `recon` holds probabilities; 0 * log 0 counts as 0.
double vae_loss(const nn::Tensor& recon, const nn::Tensor& target, const nn::Tensor& mu, const nn::Tensor& logvar,
                double beta);

class Vae {
 public:
  explicit Vae(const VaeConfig& cfg = {});

  const VaeConfig& config() const { return cfg_; }
  void init(Rng& rng);

  /// x: [batch x input] (or rank 1) with costs scaled to [0, 1].
  VaeEncoding encode(const nn::Tensor& x) const;
  /// Deterministic latent used downstream: the posterior mean.
  nn::Tensor latent(const nn::Tensor& x) const { return encode(x).mu; }
  nn::Tensor decode_logits(const nn::Tensor& z) const;
  /// Reconstruction in [0, 1].
  nn::Tensor decode(const nn::Tensor& z) const;

  /// Loss on a batch with z = mu + exp(logvar / 2) * eps. When `backward` is set,
  /// gradients of the per-sample mean loss are accumulated into the parameters.
  VaeLoss loss(const nn::Tensor& x, const nn::Tensor& eps, bool backward);

  std::vector<nn::Param*> params();
  std::vector<const nn::Param*> params() const;

 private:
  nn::Tensor encoder_features(const nn::Tensor& x, std::vector<nn::Conv2dTrace>* conv_traces,
                              nn::MlpTrace* mlp_trace) const;

  VaeConfig cfg_;
  std::vector<nn::Conv2d> convs_;
  nn::Mlp encoder_;
  nn::Dense head_;  // [mu | logvar]
  nn::Mlp decoder_;
};

}  // namespace ptdrl::wm
