// Copyright 2026 The DRASIC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRASIC_TENSOR_H_
#define DRASIC_TENSOR_H_

#include <algorithm>
#include <cstddef>
#include <cstring>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drasic/errors.h"

namespace drasic {

using Shape = std::vector<int>;

inline std::string ShapeString(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

inline std::size_t ShapeSize(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("non-positive dimension in shape " + ShapeString(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

// Dense row-major array. Image batches use the (batch, channel, height, width)
// axis order throughout.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T{0})
      : shape_(std::move(shape)), values_(ShapeSize(shape_), fill) {}

  Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), values_(std::move(values)) {
    if (ShapeSize(shape_) != values_.size()) {
      throw ShapeError("tensor shape " + ShapeString(shape_) + " holds " +
                       std::to_string(ShapeSize(shape_)) + " values, got " +
                       std::to_string(values_.size()));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  int rank() const noexcept { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T* data() noexcept { return values_.data(); }
  const T* data() const noexcept { return values_.data(); }
  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  // 4-D accessors; callers guarantee rank 4.
  std::size_t offset(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w;
  }
  T& at(int n, int c, int h, int w) { return values_[offset(n, c, h, w)]; }
  const T& at(int n, int c, int h, int w) const { return values_[offset(n, c, h, w)]; }

  void fill(T v) { std::fill(values_.begin(), values_.end(), v); }

  Tensor reshaped(Shape shape) const {
    return Tensor(std::move(shape), values_);
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(values_.begin(), values_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  // Bitwise comparison of shape and payload; distinguishes -0 from +0.
  bool BitwiseEqual(const Tensor& other) const {
    return shape_ == other.shape_ &&
           (values_.empty() ||
            std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(T)) == 0);
  }

 private:
  Shape shape_;
  std::vector<T> values_;
};

// Number of images in a (batch, ...) tensor.
template <typename T>
int BatchSize(const Tensor<T>& t) {
  return t.rank() == 0 ? 0 : t.dim(0);
}

// Copies `count` images starting at `begin` along the batch axis.
template <typename T>
Tensor<T> SliceBatch(const Tensor<T>& t, int begin, int count) {
  if (begin < 0 || count <= 0 || begin + count > t.dim(0)) {
    throw ShapeError("batch slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") out of range for shape " + ShapeString(t.shape()));
  }
  Shape shape = t.shape();
  shape[0] = count;
  const std::size_t per = t.size() / static_cast<std::size_t>(t.dim(0));
  std::vector<T> out(t.data() + per * begin, t.data() + per * (begin + count));
  return Tensor<T>(std::move(shape), std::move(out));
}

// Gathers the listed images along the batch axis.
template <typename T>
Tensor<T> GatherBatch(const Tensor<T>& t, std::span<const int> indices) {
  Shape shape = t.shape();
  shape[0] = static_cast<int>(indices.size());
  const std::size_t per = t.size() / static_cast<std::size_t>(t.dim(0));
  std::vector<T> out;
  out.reserve(per * indices.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= t.dim(0)) throw ShapeError("gather index out of range");
    out.insert(out.end(), t.data() + per * idx, t.data() + per * (idx + 1));
  }
  return Tensor<T>(std::move(shape), std::move(out));
}

}  // namespace drasic

#endif  // DRASIC_TENSOR_H_
