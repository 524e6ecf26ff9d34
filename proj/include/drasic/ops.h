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

// Differentiable operations. All are instantiated for float and double.

#ifndef DRASIC_OPS_H_
#define DRASIC_OPS_H_

#include <span>

#include "drasic/autodiff.h"
#include "drasic/conv.h"

namespace drasic {

// Elementwise arithmetic on equally shaped tensors.
template <typename T> Var<T> Add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> Sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> Mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> Scale(const Var<T>& a, T factor);

template <typename T> Var<T> Tanh(const Var<T>& x);
template <typename T> Var<T> Sigmoid(const Var<T>& x);

// `bias` may be an undefined Var.
template <typename T>
Var<T> Conv2d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias, const ConvSpec& spec);

// LSTM pointwise stages. Gate pre-activations for the input, forget, output
// and candidate gates are stacked along channels in that order (N, 4H, h, w);
// `cell` is (N, H, h, w).
//   LstmGates:      activations of conv(x; Wx) + bx + conv(h; Wh), with
//                   sigmoid on i, f, o and tanh on g
//   LstmCellUpdate: c' = f * c + i * g       (activated gates)
//   LstmHidden:     h' = o * tanh(c')
template <typename T>
Var<T> LstmGates(const Var<T>& input, const Var<T>& input_weight, const Var<T>& input_bias,
                 const ConvSpec& input_spec, const Var<T>& hidden, const Var<T>& hidden_weight,
                 const ConvSpec& hidden_spec);
template <typename T> Var<T> LstmCellUpdate(const Var<T>& act, const Var<T>& cell);
template <typename T> Var<T> LstmHidden(const Var<T>& act, const Var<T>& cell);

// (N, C*r*r, H, W) -> (N, C, H*r, W*r); channel c*r*r + i*r + j lands at
// spatial offset (i, j) inside each r x r block.
template <typename T> Var<T> DepthToSpace(const Var<T>& x, int block);

template <typename T> Var<T> ConcatBatch(std::span<const Var<T>> parts);
template <typename T> Var<T> SliceBatch(const Var<T>& x, int begin, int count);

// Forward value replaced by `forward_value`; the gradient passes to `x`
// unchanged.
template <typename T> Var<T> StraightThrough(const Var<T>& x, Tensor<T> forward_value);

// Scalar reductions (result shape {1}).
template <typename T> Var<T> MeanSquaredError(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> MeanAbsoluteError(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> MeanOf(std::span<const Var<T>> scalars);
template <typename T> Var<T> WeightedSum(const Var<T>& x, const Tensor<T>& weights);

template <typename T> Var<T> operator+(const Var<T>& a, const Var<T>& b) { return Add(a, b); }
template <typename T> Var<T> operator-(const Var<T>& a, const Var<T>& b) { return Sub(a, b); }
template <typename T> Var<T> operator*(const Var<T>& a, const Var<T>& b) { return Mul(a, b); }

}  // namespace drasic

#endif  // DRASIC_OPS_H_
