#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "fog/error.hpp"

namespace fog::nn {

// Dense row-major float64 array.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(element_count(shape_), 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_)) {
      throw Error(Errc::ShapeMismatch, "tensor data length does not match shape");
    }
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  // Contiguous slice along the leading axis.
  std::span<const double> row(std::size_t i) const {
    const std::size_t stride = shape_.empty() ? 0 : data_.size() / shape_[0];
    return std::span<const double>(data_).subspan(i * stride, stride);
  }
  std::span<double> row(std::size_t i) {
    const std::size_t stride = shape_.empty() ? 0 : data_.size() / shape_[0];
    return std::span<double>(data_).subspan(i * stride, stride);
  }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  static std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace fog::nn
