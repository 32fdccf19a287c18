/* Copyright 2026 The layeranat Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "layeranat/error.hpp"

namespace layeranat {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream oss;
  oss << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) oss << ", ";
    oss << shape[i];
  }
  oss << ']';
  return oss.str();
}

// Dense row-major tensor with value semantics.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)) {
    check_dims();
    data_.assign(shape_numel(shape_), fill);
  }

  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_dims();
    if (shape_numel(shape_) != data_.size()) {
      throw ShapeError("Tensor: shape " + shape_str(shape_) + " holds " +
                       std::to_string(shape_numel(shape_)) +
                       " values, got " + std::to_string(data_.size()));
    }
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor scalar(T v) { return Tensor(Shape{1}, std::vector<T>{v}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  bool empty() const { return data_.empty(); }

  // 2-D views; a rank-1 tensor is treated as a single row.
  std::size_t rows() const {
    return shape_.size() <= 1 ? 1 : numel() / shape_.back();
  }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  // Exact equality of shape and every value.
  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void check_dims() const {
    for (std::size_t d : shape_) {
      if (d == 0) {
        throw ShapeError("Tensor: zero-sized dimension in shape " +
                         shape_str(shape_));
      }
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

// Mean and population standard deviation, accumulated in double.
template <typename T>
std::pair<double, double> mean_std(std::span<const T> xs) {
  if (xs.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (T v : xs) sum += static_cast<double>(v);
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (T v : xs) {
    const double d = static_cast<double>(v) - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

// Copies the overlapping leading block of `src` into a tensor shaped like
// `shape`; entries outside the overlap are zero. Rank-2 only.
template <typename T>
Tensor<T> resize_leading(const Tensor<T>& src, const Shape& shape) {
  if (src.rank() != 2 || shape.size() != 2) {
    throw ShapeError("resize_leading: rank-2 tensors required, got " +
                     shape_str(src.shape()) + " -> " + shape_str(shape));
  }
  Tensor<T> out(shape);
  const std::size_t r = std::min(src.dim(0), shape[0]);
  const std::size_t c = std::min(src.dim(1), shape[1]);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) = src.at(i, j);
  }
  return out;
}

}  // namespace layeranat
