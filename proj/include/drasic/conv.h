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

#ifndef DRASIC_CONV_H_
#define DRASIC_CONV_H_

#include "drasic/tensor.h"

namespace drasic {

struct ConvSpec {
  int in_channels = 1;
  int out_channels = 1;
  int kernel_size = 1;
  int stride = 1;
  int padding = 0;

  // floor((in + 2 * padding - kernel) / stride) + 1
  int OutputExtent(int in) const { return (in + 2 * padding - kernel_size) / stride + 1; }

  void Validate() const;

  // (out_channels, in_channels, kernel, kernel)
  Shape WeightShape() const { return {out_channels, in_channels, kernel_size, kernel_size}; }

  // Output shape for an NCHW input; throws ShapeError naming the offending
  // axis when the input does not fit this spec.
  Shape OutputShape(const Shape& input) const;

  bool operator==(const ConvSpec&) const = default;
};

// out = conv(input, weight) + bias. `bias` may be null.
template <typename T>
Tensor<T> Conv2dForward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>* bias,
                        const ConvSpec& spec);

// output += conv(input, weight), without bias. `output` must already have
// the output shape.
template <typename T>
void Conv2dAccumulate(const Tensor<T>& input, const Tensor<T>& weight, const ConvSpec& spec,
                      Tensor<T>& output);

// Accumulates (+=) into whichever of grad_input / grad_weight / grad_bias is
// non-null. Buffers must already have the matching shapes.
template <typename T>
void Conv2dBackward(const Tensor<T>& input, const Tensor<T>& weight, const ConvSpec& spec,
                    const Tensor<T>& grad_output, Tensor<T>* grad_input, Tensor<T>* grad_weight,
                    Tensor<T>* grad_bias);

}  // namespace drasic

#endif  // DRASIC_CONV_H_
