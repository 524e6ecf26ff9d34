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

#ifndef DRASIC_CONVLSTM_H_
#define DRASIC_CONVLSTM_H_

#include <random>
#include <string>
#include <vector>

#include "drasic/ops.h"

namespace drasic {

template <typename T>
struct NamedParameter {
  std::string name;
  Var<T>* var;
};

// A convolution with its learnable weight and optional bias.
template <typename T>
struct ConvLayer {
  ConvSpec spec;
  Var<T> weight;
  Var<T> bias;  // undefined when the layer has no bias

  Var<T> operator()(const Var<T>& x) const { return Conv2d(x, weight, bias, spec); }
  void AppendParameters(const std::string& prefix, std::vector<NamedParameter<T>>& out);
};

// Weights uniform in +-1/sqrt(fan_in), biases zero.
template <typename T>
ConvLayer<T> MakeConvLayer(const ConvSpec& spec, bool with_bias, std::mt19937_64& rng);

template <typename T>
struct ConvLstmState {
  Var<T> hidden;
  Var<T> cell;
};

// gates = conv(x; input) + conv(h; hidden); the hidden path is stride 1 with
// "same" padding so the state keeps the input path's output resolution.
template <typename T>
struct ConvLstmLayer {
  int hidden_channels = 0;
  ConvLayer<T> input;   // in_channels -> 4 * hidden, carries the gate biases
  ConvLayer<T> hidden;  // hidden -> 4 * hidden, no bias

  void AppendParameters(const std::string& prefix, std::vector<NamedParameter<T>>& out);
};

template <typename T>
ConvLstmLayer<T> MakeConvLstmLayer(int in_channels, int hidden_channels, int kernel_size, int stride,
                                   int hidden_kernel_size, std::mt19937_64& rng);

// All-zero hidden and cell tensors of shape (batch, hidden, height, width).
template <typename T>
ConvLstmState<T> ZeroConvLstmState(int batch, int hidden_channels, int height, int width);

// One ConvLSTM step. Returns the new state; its hidden tensor is the output.
template <typename T>
ConvLstmState<T> ConvLstmCell(const Var<T>& input, const ConvLstmState<T>& state,
                              const ConvLstmLayer<T>& layer);

}  // namespace drasic

#endif  // DRASIC_CONVLSTM_H_
