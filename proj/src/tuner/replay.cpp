#include "ptdrl/tuner/replay.hpp"

#include <algorithm>
#include <cmath>

namespace ptdrl::tuner {

SumTree::SumTree(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("sum tree: capacity must be positive");
  base_ = 1;
  while (base_ < capacity) base_ <<= 1;
  nodes_.assign(2 * base_, 0.0);
}

void SumTree::set(std::size_t leaf, double value) {
  std::size_t i = base_ + leaf;
  nodes_[i] = value;
  for (i >>= 1; i >= 1; i >>= 1) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

std::size_t SumTree::find(double mass) const {
  std::size_t i = 1;
  while (i < base_) {
    const double left = nodes_[2 * i];
    if (mass < left || nodes_[2 * i + 1] <= 0.0) {
      i = 2 * i;
    } else {
      mass -= left;
      i = 2 * i + 1;
    }
  }
  return std::min(i - base_, capacity_ - 1);
}

PrioritizedReplay::PrioritizedReplay(const PerConfig& cfg) : cfg_(cfg), tree_(cfg.capacity) {
  if (cfg.alpha < 0 || !(cfg.epsilon > 0)) throw ConfigError("replay: alpha must be >= 0 and epsilon > 0");
  data_.resize(cfg.capacity);
}

std::size_t PrioritizedReplay::add(Transition t) {
  const std::size_t i = next_;
  data_[i] = std::move(t);
  tree_.set(i, max_priority_);
  next_ = (next_ + 1) % cfg_.capacity;
  size_ = std::min(size_ + 1, cfg_.capacity);
  return i;
}

PerBatch PrioritizedReplay::sample(std::size_t batch, double beta, Rng& rng) const {
  if (size_ == 0) throw SamplingError("replay: cannot sample from an empty buffer");
  if (size_ < batch) throw SamplingError("replay: fewer transitions than the batch size");
  PerBatch out;
  const double total = tree_.total();
  double max_w = 0.0;
  for (std::size_t k = 0; k < batch; ++k) {
    const std::size_t i = tree_.find(uniform(rng, 0.0, total));
    const double p = tree_.get(i) / total;
    const double w = std::pow(static_cast<double>(size_) * p, -beta);
    out.indices.push_back(i);
    out.weights.push_back(w);
    max_w = std::max(max_w, w);
  }
  for (auto& w : out.weights) w /= max_w;
  return out;
}

void PrioritizedReplay::update(std::span<const std::size_t> indices, std::span<const double> td_errors) {
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size_) throw ConfigError("replay: index out of range");
    const double p = std::pow(std::abs(td_errors[k]) + cfg_.epsilon, cfg_.alpha);
    tree_.set(indices[k], p);
    max_priority_ = std::max(max_priority_, p);
  }
}

}  // namespace ptdrl::tuner
