#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hqfno/errors.hpp"

namespace hqfno {

using Complex = std::complex<double>;

/// Dense row-major tensor; the last dimension varies fastest.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, T fill = T{})
      : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  static std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

using RealTensor = Tensor<double>;
using ComplexTensor = Tensor<Complex>;

/// Index helper for (batch, channel, x, y, z) tensors.
struct Grid5 {
  std::size_t b, c, x, y, z;

  static Grid5 of(const std::vector<std::size_t>& shape) {
    if (shape.size() != 5) {
      throw ShapeError("expected a rank-5 tensor, got rank " +
                       std::to_string(shape.size()));
    }
    return {shape[0], shape[1], shape[2], shape[3], shape[4]};
  }
  std::size_t spatial() const noexcept { return x * y * z; }
  std::size_t offset(std::size_t bi, std::size_t ci) const noexcept {
    return (bi * c + ci) * spatial();
  }
  std::size_t at(std::size_t bi, std::size_t ci, std::size_t xi, std::size_t yi,
                 std::size_t zi) const noexcept {
    return offset(bi, ci) + (xi * y + yi) * z + zi;
  }
};

inline std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

}  // namespace hqfno
