#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ptdrl/common.hpp"

namespace ptdrl::tuner {

class SamplingError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

/// Binary sum tree over a fixed number of leaves.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  void set(std::size_t leaf, double value);
  double get(std::size_t leaf) const { return nodes_[base_ + leaf]; }
  double total() const { return nodes_[1]; }
  /// Leaf whose cumulative range contains mass in [0, total()).
  std::size_t find(double mass) const;

 private:
  std::size_t capacity_;
  std::size_t base_;
  std::vector<double> nodes_;
};

/// One stored transition. States are kept in single precision to halve memory.
struct Transition {
  std::vector<float> state;
  std::uint32_t action = 0;
  double reward = 0.0;
  std::vector<float> next_state;
  bool done = false;
};

struct PerBatch {
  std::vector<std::size_t> indices;
  std::vector<double> weights;  // importance weights normalized by the batch maximum
};

struct PerConfig {
  std::size_t capacity = 200000;
  double alpha = 0.6;
  double epsilon = 1e-2;  // added to |td| before exponentiation
};

/// Proportional prioritized replay. Stored priority is (|td| + eps)^alpha; new
/// transitions enter at the current maximum priority (1 for an empty buffer).
class PrioritizedReplay {
 public:
  explicit PrioritizedReplay(const PerConfig& cfg = {});

  std::size_t size() const { return size_; }
  const PerConfig& config() const { return cfg_; }
  std::size_t add(Transition t);
  const Transition& at(std::size_t index) const { return data_[index]; }
  double priority(std::size_t index) const { return tree_.get(index); }
  double max_priority() const { return max_priority_; }

  /// Independent draws with probability priority_i / sum; weights (N P(i))^-beta / max.
  PerBatch sample(std::size_t batch, double beta, Rng& rng) const;
  void update(std::span<const std::size_t> indices, std::span<const double> td_errors);

 private:
  PerConfig cfg_;
  SumTree tree_;
  std::vector<Transition> data_;
  std::size_t next_ = 0;
  std::size_t size_ = 0;
  double max_priority_ = 1.0;
};

}  // namespace ptdrl::tuner
