#include "ptdrl/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ptdrl::nn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (shape_size(shape_) != data_.size()) {
    throw ConfigError("tensor shape " + shape_string(shape_) + " does not match " +
                      std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::from_storage(Shape shape, Storage data) {
  if (shape_size(shape) != data.size()) {
    throw ConfigError("tensor shape " + shape_string(shape) + " does not match " + std::to_string(data.size()) +
                      " values");
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(data);
  return t;
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::vector(std::span<const double> values) {
  return Tensor({values.size()}, std::vector<double>(values.begin(), values.end()));
}

std::size_t Tensor::rows() const { return shape_.size() >= 2 ? shape_[0] : 1; }

std::size_t Tensor::cols() const {
  if (shape_.empty()) return data_.size();
  if (shape_.size() == 1) return shape_[0];
  return data_.size() / std::max<std::size_t>(shape_[0], 1);
}

MatrixMap Tensor::matrix() {
  return MatrixMap(data_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
}

ConstMatrixMap Tensor::matrix() const {
  return ConstMatrixMap(data_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
}

Tensor Tensor::reshaped(Shape shape) const { return from_storage(std::move(shape), data_); }

Tensor Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return from_storage({c}, Storage(data_.begin() + static_cast<std::ptrdiff_t>(r * c),
                             data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * c)));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::require_finite(std::string_view what) const {
  if (!all_finite()) throw NumericError("non-finite value in " + std::string(what));
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) return Tensor({0, 0});
  const std::size_t d = rows.front().size();
  Tensor out({rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw ConfigError("stack_rows: ragged rows");
    std::copy(rows[i].data().begin(), rows[i].data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return out;
}

}  // namespace ptdrl::nn
