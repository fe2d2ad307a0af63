#include "ptdrl/wm/mdn_rnn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ptdrl::wm {

using nn::Tensor;

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// log pi_k + log N_k(z) for one row.
std::vector<double> joint_log(const Mixture& mix, const Tensor& z, std::size_t b) {
  const std::size_t k_n = mix.components, d_n = mix.dim;
  std::vector<double> out(k_n);
  for (std::size_t k = 0; k < k_n; ++k) {
    double s = mix.log_pi.at(b, k);
    for (std::size_t d = 0; d < d_n; ++d) {
      const double ls = mix.log_sigma.at(b, k * d_n + d);
      const double u = (z.at(b, d) - mix.mu.at(b, k * d_n + d)) * std::exp(-ls);
      s -= 0.5 * u * u + ls + kHalfLog2Pi;
    }
    out[k] = s;
  }
  return out;
}

Tensor as_batch(const Tensor& t) { return t.rank() == 1 ? t.reshaped({1, t.size()}) : t; }

}  // namespace

double Mixture::pi(std::size_t b, std::size_t k) const { return std::exp(log_pi.at(b, k)); }
double Mixture::sigma(std::size_t b, std::size_t k, std::size_t d) const {
  return std::exp(log_sigma.at(b, k * dim + d));
}

Mixture Mixture::from_head(const Tensor& raw_in, std::size_t k_n, std::size_t d_n) {
  const Tensor raw = as_batch(raw_in);
  if (raw.cols() != k_n * (1 + 2 * d_n)) throw ConfigError("mixture: head width mismatch");
  const std::size_t b_n = raw.rows();
  Mixture m{k_n, d_n, Tensor({b_n, k_n}), Tensor({b_n, k_n * d_n}), Tensor({b_n, k_n * d_n})};
  for (std::size_t b = 0; b < b_n; ++b) {
    std::vector<double> logits(k_n);
    for (std::size_t k = 0; k < k_n; ++k) logits[k] = raw.at(b, k);
    const double lse = log_sum_exp(logits);
    for (std::size_t k = 0; k < k_n; ++k) m.log_pi.at(b, k) = logits[k] - lse;
    for (std::size_t j = 0; j < k_n * d_n; ++j) {
      m.mu.at(b, j) = raw.at(b, k_n + j);
      m.log_sigma.at(b, j) = raw.at(b, k_n + k_n * d_n + j);
    }
  }
  return m;
}

std::vector<double> mdn_nll(const Mixture& mix, const Tensor& z_next_in) {
  const Tensor z = as_batch(z_next_in);
  if (z.cols() != mix.dim || z.rows() != mix.batch()) throw ConfigError("mdn_nll: target shape mismatch");
  std::vector<double> out(mix.batch());
  for (std::size_t b = 0; b < mix.batch(); ++b) out[b] = -log_sum_exp(joint_log(mix, z, b));
  return out;
}

Tensor mdn_nll_head_grad(const Mixture& mix, const Tensor& z_next_in, const std::vector<double>& weight) {
  const Tensor z = as_batch(z_next_in);
  const std::size_t k_n = mix.components, d_n = mix.dim;
  Tensor g({mix.batch(), k_n * (1 + 2 * d_n)});
  for (std::size_t b = 0; b < mix.batch(); ++b) {
    if (weight[b] == 0.0) continue;
    const auto jl = joint_log(mix, z, b);
    const double lse = log_sum_exp(jl);
    for (std::size_t k = 0; k < k_n; ++k) {
      const double resp = std::exp(jl[k] - lse);
      g.at(b, k) = weight[b] * (std::exp(mix.log_pi.at(b, k)) - resp);
      for (std::size_t d = 0; d < d_n; ++d) {
        const std::size_t j = k * d_n + d;
        const double inv_s = std::exp(-mix.log_sigma.at(b, j));
        const double u = (z.at(b, d) - mix.mu.at(b, j)) * inv_s;
        g.at(b, k_n + j) = -weight[b] * resp * u * inv_s;
        g.at(b, k_n + k_n * d_n + j) = weight[b] * resp * (1.0 - u * u);
      }
    }
  }
  return g;
}

std::vector<double> persistence_nll(const Tensor& z_prev_in, const Tensor& z_next_in) {
  const Tensor a = as_batch(z_prev_in), b = as_batch(z_next_in);
  std::vector<double> out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.cols(); ++d) {
      const double u = b.at(r, d) - a.at(r, d);
      s += 0.5 * u * u + kHalfLog2Pi;
    }
    out[r] = s;
  }
  return out;
}

MdnRnn::MdnRnn(const MdnRnnConfig& cfg)
    : lstm("rnn.lstm", cfg.latent + cfg.action, cfg.hidden),
      head("rnn.head", cfg.hidden, cfg.components * (1 + 2 * cfg.latent), nn::Activation::identity),
      cfg_(cfg) {}

void MdnRnn::init(Rng& rng) {
  lstm.init(rng);
  head.init_glorot(rng);
}

MdnStep MdnRnn::step(const Tensor& z_in, const Tensor& a_in, const nn::LstmState& state) const {
  const Tensor z = as_batch(z_in), a = as_batch(a_in);
  if (z.cols() != cfg_.latent || a.cols() != cfg_.action || z.rows() != a.rows()) {
    throw ConfigError("mdn-rnn: expected z[" + std::to_string(cfg_.latent) + "] and a[" +
                      std::to_string(cfg_.action) + "]");
  }
  Tensor x({z.rows(), cfg_.latent + cfg_.action});
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (std::size_t j = 0; j < cfg_.latent; ++j) x.at(r, j) = z.at(r, j);
    for (std::size_t j = 0; j < cfg_.action; ++j) x.at(r, cfg_.latent + j) = a.at(r, j);
  }
  MdnStep out;
  out.state = lstm.step(x, state);
  out.mixture = Mixture::from_head(head.forward(out.state.h), cfg_.components, cfg_.latent);
  return out;
}

double MdnRnn::chunk_loss(const SequenceChunk& chunk, nn::LstmState& state, bool backward) {
  const std::size_t t_n = chunk.inputs.size();
  std::vector<nn::LstmStepTrace> lstm_traces(backward ? t_n : 0);
  std::vector<nn::DenseTrace> head_traces(backward ? t_n : 0);
  std::vector<Mixture> mixes(t_n);

  double total_w = 0.0;
  for (const auto& w : chunk.weight)
    for (double x : w) total_w += x;
  if (total_w <= 0.0) return 0.0;

  double loss = 0.0;
  for (std::size_t t = 0; t < t_n; ++t) {
    const std::size_t b_n = chunk.inputs[t].rows();
    for (std::size_t b = 0; b < b_n; ++b) {
      if (!chunk.reset[t][b]) continue;
      for (std::size_t j = 0; j < cfg_.hidden; ++j) state.h.at(b, j) = state.c.at(b, j) = 0.0;
    }
    state = lstm.step(chunk.inputs[t], state, backward ? &lstm_traces[t] : nullptr);
    mixes[t] = Mixture::from_head(head.forward(state.h, backward ? &head_traces[t] : nullptr), cfg_.components,
                                  cfg_.latent);
    const auto nll = mdn_nll(mixes[t], chunk.targets[t]);
    for (std::size_t b = 0; b < b_n; ++b) loss += chunk.weight[t][b] * nll[b];
  }
  loss /= total_w;
  if (!std::isfinite(loss)) throw NumericError("mdn-rnn: non-finite loss");
  if (!backward) return loss;

  Tensor dh_next, dc_next;
  for (std::size_t t = t_n; t-- > 0;) {
    std::vector<double> w = chunk.weight[t];
    for (double& x : w) x /= total_w;
    Tensor dh = head.backward(head_traces[t], mdn_nll_head_grad(mixes[t], chunk.targets[t], w));
    Tensor dc(dh.shape());
    if (t + 1 < t_n) {
      dh.matrix() += dh_next.matrix();
      dc = dc_next;
    }
    auto g = lstm.backward_step(lstm_traces[t], dh, dc);
    for (std::size_t b = 0; b < dh.rows(); ++b) {
      if (!chunk.reset[t][b]) continue;
      for (std::size_t j = 0; j < cfg_.hidden; ++j) g.dh_prev.at(b, j) = g.dc_prev.at(b, j) = 0.0;
    }
    dh_next = std::move(g.dh_prev);
    dc_next = std::move(g.dc_prev);
  }
  return loss;
}

std::vector<nn::Param*> MdnRnn::params() {
  std::vector<nn::Param*> out = lstm.params();
  for (auto* p : head.params()) out.push_back(p);
  return out;
}

std::vector<const nn::Param*> MdnRnn::params() const {
  std::vector<const nn::Param*> out = lstm.params();
  for (auto* p : head.params()) out.push_back(p);
  return out;
}

}  // namespace ptdrl::wm
