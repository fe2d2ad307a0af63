#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptdrl/common.hpp"

namespace ptdrl::nn {

using Shape = std::vector<std::size_t>;
/// Kernel-aligned buffer: Eigen picks the same vectorized path for every tensor.
using Storage = std::vector<double, Eigen::aligned_allocator<double>>;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles. Rank-1 tensors are treated as a batch of one row.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);
  static Tensor from_storage(Shape shape, Storage data);

  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(std::span<const double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }

  /// Leading dimension for rank >= 2, otherwise 1.
  std::size_t rows() const;
  /// Product of all trailing dimensions (the whole size for rank 1).
  std::size_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  Storage& storage() { return data_; }
  const Storage& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  MatrixMap matrix();
  ConstMatrixMap matrix() const;

  Tensor reshaped(Shape shape) const;
  /// Copy of row `r` as a rank-1 tensor.
  Tensor row(std::size_t r) const;

  void fill(double v);
  bool all_finite() const;
  /// Throws NumericError naming `what` when any element is NaN or infinite.
  void require_finite(std::string_view what) const;

  bool operator==(const Tensor& o) const = default;

 private:
  Shape shape_;
  Storage data_;
};

/// Stacks equally-shaped rank-1 tensors into a [n x d] batch.
Tensor stack_rows(std::span<const Tensor> rows);

}  // namespace ptdrl::nn
