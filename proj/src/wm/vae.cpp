#include "ptdrl/wm/vae.hpp"

#include <cmath>

namespace ptdrl::wm {

using nn::Tensor;

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double vae_loss(const Tensor& recon, const Tensor& target, const Tensor& mu, const Tensor& logvar, double beta) {
  if (recon.size() != target.size() || mu.size() != logvar.size()) throw ConfigError("vae_loss: shape mismatch");
  double bce = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const double r = recon[i], t = target[i];
    if (t > 0) bce -= t * std::log(r);
    if (t < 1) bce -= (1 - t) * std::log1p(-r);
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) kl += 0.5 * (mu[i] * mu[i] + std::exp(logvar[i]) - 1.0 - logvar[i]);
  return bce + beta * kl;
}

Vae::Vae(const VaeConfig& cfg) : cfg_(cfg) {
  std::size_t width = cfg.input();
  if (cfg.conv_encoder) {
    if (cfg.input_side % 4 != 0) throw ConfigError("vae: conv encoder needs a side divisible by 4");
    convs_.emplace_back("vae.conv.0", 1, 8, cfg.input_side, 4, 2, 1, nn::Activation::relu);
    convs_.emplace_back("vae.conv.1", 8, 16, cfg.input_side / 2, 4, 2, 1, nn::Activation::relu);
    width = convs_.back().out_features();
  }
  std::vector<nn::LayerSpec> enc, dec;
  for (auto h : cfg.hidden) enc.push_back({h, nn::Activation::relu});
  for (auto it = cfg.hidden.rbegin(); it != cfg.hidden.rend(); ++it) dec.push_back({*it, nn::Activation::relu});
  dec.push_back({cfg.input(), nn::Activation::identity});
  encoder_ = nn::Mlp("vae.enc", width, enc);
  head_ = nn::Dense("vae.head", cfg.hidden.empty() ? width : cfg.hidden.back(), 2 * cfg.latent,
                    nn::Activation::identity);
  decoder_ = nn::Mlp("vae.dec", cfg.latent, dec);
}

void Vae::init(Rng& rng) {
  for (auto& c : convs_) c.init_glorot(rng);
  encoder_.init_glorot(rng);
  head_.init_glorot(rng);
  decoder_.init_glorot(rng);
}

Tensor Vae::encoder_features(const Tensor& x, std::vector<nn::Conv2dTrace>* conv_traces, nn::MlpTrace* mlp_trace) const {
  if (x.cols() != cfg_.input()) {
    throw ConfigError("vae: expected input width " + std::to_string(cfg_.input()) + ", got " + std::to_string(x.cols()));
  }
  Tensor h = x.rank() == 1 ? x.reshaped({1, x.size()}) : x;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    nn::Conv2dTrace* t = nullptr;
    if (conv_traces) t = &conv_traces->emplace_back();
    h = convs_[i].forward(h, t);
  }
  return encoder_.layers.empty() ? h : encoder_.forward(h, mlp_trace);
}

VaeEncoding Vae::encode(const Tensor& x) const {
  const Tensor stats = head_.forward(encoder_features(x, nullptr, nullptr));
  const std::size_t b = stats.rows(), l = cfg_.latent;
  VaeEncoding e{Tensor({b, l}), Tensor({b, l})};
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t j = 0; j < l; ++j) {
      e.mu.at(r, j) = stats.at(r, j);
      e.logvar.at(r, j) = stats.at(r, l + j);
    }
  }
  if (x.rank() == 1) {
    e.mu = e.mu.reshaped({l});
    e.logvar = e.logvar.reshaped({l});
  }
  return e;
}

Tensor Vae::decode_logits(const Tensor& z) const { return decoder_.forward(z); }

Tensor Vae::decode(const Tensor& z) const { return nn::activate(nn::Activation::sigmoid, decode_logits(z)); }

VaeLoss Vae::loss(const Tensor& x_in, const Tensor& eps, bool backward) {
  const Tensor x = x_in.rank() == 1 ? x_in.reshaped({1, x_in.size()}) : x_in;
  const std::size_t b = x.rows(), l = cfg_.latent, n = cfg_.input();
  if (eps.size() != b * l) throw ConfigError("vae: eps must be [batch x latent]");

  std::vector<nn::Conv2dTrace> conv_traces;
  nn::MlpTrace enc_trace, dec_trace;
  nn::DenseTrace head_trace;
  const Tensor feat = encoder_features(x, &conv_traces, &enc_trace);
  const Tensor stats = head_.forward(feat, &head_trace);

  Tensor z({b, l});
  for (std::size_t r = 0; r < b; ++r)
    for (std::size_t j = 0; j < l; ++j)
      z.at(r, j) = stats.at(r, j) + std::exp(0.5 * stats.at(r, l + j)) * eps[r * l + j];
  const Tensor logits = decoder_.forward(z, &dec_trace);

  VaeLoss out;
  for (std::size_t i = 0; i < b * n; ++i) out.bce += softplus(logits[i]) - x[i] * logits[i];
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t j = 0; j < l; ++j) {
      const double mu = stats.at(r, j), lv = stats.at(r, l + j);
      out.kl += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
    }
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  out.bce *= inv_b;
  out.kl *= inv_b;
  out.total = out.bce + cfg_.beta * out.kl;
  if (!std::isfinite(out.total)) throw NumericError("vae: non-finite loss");
  if (!backward) return out;

  Tensor dlogits({b, n});
  for (std::size_t i = 0; i < b * n; ++i) dlogits[i] = (1.0 / (1.0 + std::exp(-logits[i])) - x[i]) * inv_b;
  const Tensor dz = decoder_.backward(dec_trace, dlogits);
  Tensor dstats({b, 2 * l});
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t j = 0; j < l; ++j) {
      const double mu = stats.at(r, j), lv = stats.at(r, l + j);
      const double sd = std::exp(0.5 * lv);
      dstats.at(r, j) = dz.at(r, j) + cfg_.beta * mu * inv_b;
      dstats.at(r, l + j) = dz.at(r, j) * eps[r * l + j] * 0.5 * sd + cfg_.beta * 0.5 * (std::exp(lv) - 1.0) * inv_b;
    }
  }
  Tensor dfeat = head_.backward(head_trace, dstats);
  if (!encoder_.layers.empty()) dfeat = encoder_.backward(enc_trace, dfeat);
  for (std::size_t i = convs_.size(); i-- > 0;) dfeat = convs_[i].backward(conv_traces[i], dfeat);
  return out;
}

std::vector<nn::Param*> Vae::params() {
  std::vector<nn::Param*> out;
  for (auto& c : convs_)
    for (auto* p : c.params()) out.push_back(p);
  for (auto* p : encoder_.params()) out.push_back(p);
  for (auto* p : head_.params()) out.push_back(p);
  for (auto* p : decoder_.params()) out.push_back(p);
  return out;
}

std::vector<const nn::Param*> Vae::params() const {
  std::vector<const nn::Param*> out;
  for (auto* p : const_cast<Vae*>(this)->params()) out.push_back(p);
  return out;
}

}  // namespace ptdrl::wm
