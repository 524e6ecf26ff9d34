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

#include "drasic/conv.h"

#include <Eigen/Core>

#include <algorithm>
#include <string>

namespace drasic {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

struct Geometry {
  int channels, height, width;
  int out_height, out_width;
  int kernel, stride, padding;

  std::size_t image() const { return static_cast<std::size_t>(height) * width; }
  std::size_t plane() const { return static_cast<std::size_t>(out_height) * out_width; }
  std::size_t rows() const { return static_cast<std::size_t>(channels) * kernel * kernel; }
  // A 1x1 stride-1 unpadded convolution reads the image itself as its
  // column matrix.
  bool pointwise() const { return kernel == 1 && stride == 1 && padding == 0; }
};

Geometry MakeGeometry(const Shape& input, const ConvSpec& spec) {
  return {input[1],
          input[2],
          input[3],
          spec.OutputExtent(input[2]),
          spec.OutputExtent(input[3]),
          spec.kernel_size,
          spec.stride,
          spec.padding};
}

// Output columns [begin, end) whose input column ox * stride - padding + kx
// lies inside the image.
struct ValidRange {
  int begin, end;
};

ValidRange ValidColumns(const Geometry& g, int kx) {
  const int offset = kx - g.padding;
  int begin = offset >= 0 ? 0 : (-offset + g.stride - 1) / g.stride;
  int end = g.width - 1 - offset < 0 ? 0 : (g.width - 1 - offset) / g.stride + 1;
  end = std::min(end, g.out_width);
  begin = std::min(begin, end);
  return {begin, end};
}

// Unfolds every receptive field of one image into a column of the
// (channels * k * k) x (out_h * out_w) matrix `col`.
template <typename T>
void Im2Col(const T* x, const Geometry& g, T* col) {
  const std::size_t plane = g.plane();
  for (int c = 0; c < g.channels; ++c) {
    const T* src = x + c * g.image();
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        T* dst = col + ((static_cast<std::size_t>(c) * g.kernel + ky) * g.kernel + kx) * plane;
        const ValidRange r = ValidColumns(g, kx);
        const int offset = kx - g.padding;
        for (int oy = 0; oy < g.out_height; ++oy) {
          T* d = dst + static_cast<std::size_t>(oy) * g.out_width;
          const int iy = oy * g.stride - g.padding + ky;
          if (iy < 0 || iy >= g.height) {
            std::fill(d, d + g.out_width, T{0});
            continue;
          }
          const T* row = src + static_cast<std::size_t>(iy) * g.width + offset;
          std::fill(d, d + r.begin, T{0});
          if (g.stride == 1) {
            std::copy(row + r.begin, row + r.end, d + r.begin);
          } else {
            for (int ox = r.begin; ox < r.end; ++ox) d[ox] = row[ox * g.stride];
          }
          std::fill(d + r.end, d + g.out_width, T{0});
        }
      }
    }
  }
}

// Adjoint of Im2Col: folds columns back, accumulating overlaps into dx.
template <typename T>
void Col2Im(const T* col, const Geometry& g, T* dx) {
  const std::size_t plane = g.plane();
  for (int c = 0; c < g.channels; ++c) {
    T* dst = dx + c * g.image();
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        const T* src = col + ((static_cast<std::size_t>(c) * g.kernel + ky) * g.kernel + kx) * plane;
        const ValidRange r = ValidColumns(g, kx);
        const int offset = kx - g.padding;
        for (int oy = 0; oy < g.out_height; ++oy) {
          const int iy = oy * g.stride - g.padding + ky;
          if (iy < 0 || iy >= g.height) continue;
          const T* s = src + static_cast<std::size_t>(oy) * g.out_width;
          T* row = dst + static_cast<std::size_t>(iy) * g.width + offset;
          for (int ox = r.begin; ox < r.end; ++ox) row[ox * g.stride] += s[ox];
        }
      }
    }
  }
}

void CheckWeight(const Shape& weight, const ConvSpec& spec) {
  if (weight != spec.WeightShape()) {
    throw ShapeError("conv2d weight shape " + ShapeString(weight) + " does not match spec " +
                     ShapeString(spec.WeightShape()) + " (out_channels, in_channels, kernel, kernel)");
  }
}

template <typename T>
void CheckBias(const Tensor<T>* bias, const ConvSpec& spec) {
  if (bias != nullptr && bias->shape() != Shape{spec.out_channels}) {
    throw ShapeError("conv2d bias shape " + ShapeString(bias->shape()) + " does not match out_channels " +
                     std::to_string(spec.out_channels));
  }
}

}  // namespace

void ConvSpec::Validate() const {
  if (in_channels < 1 || out_channels < 1) throw ShapeError("conv2d channel counts must be >= 1");
  if (kernel_size < 1) throw ShapeError("conv2d kernel_size must be >= 1");
  if (stride < 1) throw ShapeError("conv2d stride must be >= 1");
  if (padding < 0) throw ShapeError("conv2d padding must be >= 0");
}

Shape ConvSpec::OutputShape(const Shape& input) const {
  Validate();
  if (input.size() != 4) {
    throw ShapeError("conv2d expects a rank-4 (batch, channel, height, width) input, got " +
                     ShapeString(input));
  }
  if (input[1] != in_channels) {
    throw ShapeError("conv2d channel axis mismatch: input has " + std::to_string(input[1]) +
                     " channels, spec expects " + std::to_string(in_channels));
  }
  const int oh = OutputExtent(input[2]);
  const int ow = OutputExtent(input[3]);
  if (input[2] + 2 * padding < kernel_size || oh < 1) {
    throw ShapeError("conv2d height axis too small: " + std::to_string(input[2]) +
                     " with kernel " + std::to_string(kernel_size));
  }
  if (input[3] + 2 * padding < kernel_size || ow < 1) {
    throw ShapeError("conv2d width axis too small: " + std::to_string(input[3]) +
                     " with kernel " + std::to_string(kernel_size));
  }
  return {input[0], out_channels, oh, ow};
}

template <typename T>
void Conv2dAccumulate(const Tensor<T>& input, const Tensor<T>& weight, const ConvSpec& spec,
                      Tensor<T>& output) {
  const Shape out_shape = spec.OutputShape(input.shape());
  CheckWeight(weight.shape(), spec);
  if (output.shape() != out_shape) {
    throw ShapeError("conv2d output buffer " + ShapeString(output.shape()) + " does not match " +
                     ShapeString(out_shape));
  }
  const Geometry g = MakeGeometry(input.shape(), spec);
  const auto rows = static_cast<Eigen::Index>(g.rows());
  const auto plane = static_cast<Eigen::Index>(g.plane());
  ConstMatrixMap<T> w(weight.data(), spec.out_channels, rows);
  RowMatrix<T> col(g.pointwise() ? 0 : rows, plane);
  for (int n = 0; n < out_shape[0]; ++n) {
    const T* x = input.data() + n * g.channels * g.image();
    if (!g.pointwise()) Im2Col(x, g, col.data());
    ConstMatrixMap<T> cols(g.pointwise() ? x : col.data(), rows, plane);
    MatrixMap<T> out(output.data() + n * spec.out_channels * g.plane(), spec.out_channels, plane);
    out.noalias() += w * cols;
  }
}

template <typename T>
Tensor<T> Conv2dForward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>* bias,
                        const ConvSpec& spec) {
  CheckBias(bias, spec);
  Tensor<T> out(spec.OutputShape(input.shape()));
  if (bias != nullptr) {
    const std::size_t plane = static_cast<std::size_t>(out.dim(2)) * out.dim(3);
    for (int n = 0; n < out.dim(0); ++n) {
      for (int co = 0; co < spec.out_channels; ++co) {
        T* dst = out.data() + (static_cast<std::size_t>(n) * spec.out_channels + co) * plane;
        std::fill(dst, dst + plane, (*bias)[co]);
      }
    }
  }
  Conv2dAccumulate(input, weight, spec, out);
  return out;
}

template <typename T>
void Conv2dBackward(const Tensor<T>& input, const Tensor<T>& weight, const ConvSpec& spec,
                    const Tensor<T>& grad_output, Tensor<T>* grad_input, Tensor<T>* grad_weight,
                    Tensor<T>* grad_bias) {
  const Geometry g = MakeGeometry(input.shape(), spec);
  const auto rows = static_cast<Eigen::Index>(g.rows());
  const auto plane = static_cast<Eigen::Index>(g.plane());
  ConstMatrixMap<T> w(weight.data(), spec.out_channels, rows);
  const bool unfold = !g.pointwise();
  RowMatrix<T> col(unfold && grad_weight != nullptr ? rows : 0, plane);
  RowMatrix<T> dcol(unfold && grad_input != nullptr ? rows : 0, plane);
  for (int n = 0; n < input.dim(0); ++n) {
    ConstMatrixMap<T> dout(grad_output.data() + n * spec.out_channels * g.plane(), spec.out_channels,
                           plane);
    if (grad_bias != nullptr) {
      // Fixed summation order: Eigen's vectorized reductions peel by address,
      // which would make results depend on where the buffer was allocated.
      for (int co = 0; co < spec.out_channels; ++co) {
        const T* row = dout.data() + static_cast<std::size_t>(co) * g.plane();
        T sum{0};
        for (std::size_t i = 0; i < g.plane(); ++i) sum += row[i];
        (*grad_bias)[co] += sum;
      }
    }
    const std::size_t x_offset = n * g.channels * g.image();
    if (grad_weight != nullptr) {
      const T* x = input.data() + x_offset;
      if (unfold) Im2Col(x, g, col.data());
      ConstMatrixMap<T> cols(unfold ? col.data() : x, rows, plane);
      MatrixMap<T> dw(grad_weight->data(), spec.out_channels, rows);
      dw.noalias() += dout * cols.transpose();
    }
    if (grad_input != nullptr) {
      T* dx = grad_input->data() + x_offset;
      if (unfold) {
        dcol.noalias() = w.transpose() * dout;
        Col2Im(dcol.data(), g, dx);
      } else {
        MatrixMap<T>(dx, rows, plane).noalias() += w.transpose() * dout;
      }
    }
  }
}

template Tensor<float> Conv2dForward(const Tensor<float>&, const Tensor<float>&, const Tensor<float>*,
                                     const ConvSpec&);
template Tensor<double> Conv2dForward(const Tensor<double>&, const Tensor<double>&,
                                      const Tensor<double>*, const ConvSpec&);
template void Conv2dAccumulate(const Tensor<float>&, const Tensor<float>&, const ConvSpec&,
                               Tensor<float>&);
template void Conv2dAccumulate(const Tensor<double>&, const Tensor<double>&, const ConvSpec&,
                               Tensor<double>&);
template void Conv2dBackward(const Tensor<float>&, const Tensor<float>&, const ConvSpec&,
                             const Tensor<float>&, Tensor<float>*, Tensor<float>*, Tensor<float>*);
template void Conv2dBackward(const Tensor<double>&, const Tensor<double>&, const ConvSpec&,
                             const Tensor<double>&, Tensor<double>*, Tensor<double>*,
                             Tensor<double>*);

}  // namespace drasic
