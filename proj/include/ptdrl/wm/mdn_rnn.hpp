#pragma once

#include <vector>

#include "ptdrl/nn/layers.hpp"

namespace ptdrl::wm {

/// Diagonal Gaussian mixture over the next latent, one per batch row.
struct Mixture {
  std::size_t components = 0;
  std::size_t dim = 0;
  nn::Tensor log_pi;     // [batch x K], normalized
  nn::Tensor mu;         // [batch x K*D]
  nn::Tensor log_sigma;  // [batch x K*D]

  std::size_t batch() const { return log_pi.rows(); }
  double pi(std::size_t b, std::size_t k) const;
  double sigma(std::size_t b, std::size_t k, std::size_t d) const;

  /// From raw head output laid out as [K logits | K*D means | K*D log-scales].
  static Mixture from_head(const nn::Tensor& raw, std::size_t components, std::size_t dim);
};

/// Per-row -log sum_k pi_k prod_d N(z[d]; mu_kd, sigma_kd), evaluated with log-sum-exp.
std::vector<double> mdn_nll(const Mixture& mix, const nn::Tensor& z_next);

/// Gradient of sum_b weight[b] * nll_b with respect to the raw head output.
nn::Tensor mdn_nll_head_grad(const Mixture& mix, const nn::Tensor& z_next, const std::vector<double>& weight);

/// NLL of z_next under N(z_prev, I) per row.
std::vector<double> persistence_nll(const nn::Tensor& z_prev, const nn::Tensor& z_next);

struct MdnRnnConfig {
  std::size_t latent = 64;
  std::size_t action = 3;
  std::size_t hidden = 256;
  std::size_t components = 5;
};

struct MdnStep {
  nn::LstmState state;
  Mixture mixture;
};

/// Truncated-BPTT chunk: per tick t, inputs [batch x (latent+action)], targets [batch x latent],
/// a reset flag per row (state zeroed before the step) and a loss weight per row.
struct SequenceChunk {
  std::vector<nn::Tensor> inputs;
  std::vector<nn::Tensor> targets;
  std::vector<std::vector<std::uint8_t>> reset;
  std::vector<std::vector<double>> weight;
};

class MdnRnn {
 public:
  explicit MdnRnn(const MdnRnnConfig& cfg = {});

  const MdnRnnConfig& config() const { return cfg_; }
  void init(Rng& rng);
  nn::LstmState initial_state(std::size_t batch = 1) const { return lstm.zero_state(batch); }

  /// One tick: LSTM on concat(z, a), then the mixture head on the new hidden output.
  MdnStep step(const nn::Tensor& z, const nn::Tensor& action, const nn::LstmState& state) const;

  /// Weighted mean NLL over the chunk, starting from `state` and leaving the final state in it.
  /// With `backward`, accumulates gradients (no flow into the incoming state).
  double chunk_loss(const SequenceChunk& chunk, nn::LstmState& state, bool backward);

  std::vector<nn::Param*> params();
  std::vector<const nn::Param*> params() const;

  nn::Lstm lstm;
  nn::Dense head;

 private:
  MdnRnnConfig cfg_;
};

}  // namespace ptdrl::wm
