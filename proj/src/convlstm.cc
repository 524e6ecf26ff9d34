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

#include "drasic/convlstm.h"

#include <cmath>

namespace drasic {

template <typename T>
void ConvLayer<T>::AppendParameters(const std::string& prefix, std::vector<NamedParameter<T>>& out) {
  out.push_back({prefix + ".weight", &weight});
  if (bias.defined()) out.push_back({prefix + ".bias", &bias});
}

template <typename T>
ConvLayer<T> MakeConvLayer(const ConvSpec& spec, bool with_bias, std::mt19937_64& rng) {
  spec.Validate();
  const double fan_in = static_cast<double>(spec.in_channels) * spec.kernel_size * spec.kernel_size;
  const double bound = std::sqrt(3.0 / fan_in);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor<T> w(spec.WeightShape());
  for (auto& v : w.values()) v = static_cast<T>(dist(rng));
  ConvLayer<T> layer;
  layer.spec = spec;
  layer.weight = Var<T>::Parameter(std::move(w));
  if (with_bias) layer.bias = Var<T>::Parameter(Tensor<T>(Shape{spec.out_channels}));
  return layer;
}

template <typename T>
void ConvLstmLayer<T>::AppendParameters(const std::string& prefix,
                                        std::vector<NamedParameter<T>>& out) {
  input.AppendParameters(prefix + ".input", out);
  hidden.AppendParameters(prefix + ".hidden", out);
}

template <typename T>
ConvLstmLayer<T> MakeConvLstmLayer(int in_channels, int hidden_channels, int kernel_size, int stride,
                                   int hidden_kernel_size, std::mt19937_64& rng) {
  if (hidden_kernel_size % 2 == 0) throw ShapeError("ConvLSTM hidden kernel must be odd");
  ConvLstmLayer<T> layer;
  layer.hidden_channels = hidden_channels;
  layer.input = MakeConvLayer<T>(
      ConvSpec{in_channels, 4 * hidden_channels, kernel_size, stride, kernel_size / 2}, true, rng);
  layer.hidden = MakeConvLayer<T>(
      ConvSpec{hidden_channels, 4 * hidden_channels, hidden_kernel_size, 1, hidden_kernel_size / 2},
      false, rng);
  Tensor<T>& bias = layer.input.bias.mutable_value();
  for (int k = 0; k < hidden_channels; ++k) bias[hidden_channels + k] = T{1};  // forget gate
  return layer;
}

template <typename T>
ConvLstmState<T> ZeroConvLstmState(int batch, int hidden_channels, int height, int width) {
  const Shape shape{batch, hidden_channels, height, width};
  return {Var<T>::Constant(Tensor<T>(shape)), Var<T>::Constant(Tensor<T>(shape))};
}

template <typename T>
ConvLstmState<T> ConvLstmCell(const Var<T>& input, const ConvLstmState<T>& state,
                              const ConvLstmLayer<T>& layer) {
  const Shape out = layer.input.spec.OutputShape(input.shape());
  const Shape& h = state.hidden.shape();
  if (h != state.cell.shape()) {
    throw ShapeError("ConvLSTM hidden " + ShapeString(h) + " and cell " +
                     ShapeString(state.cell.shape()) + " shapes differ");
  }
  if (h.size() != 4 || h[0] != out[0] || h[1] != layer.hidden_channels || h[2] != out[2] ||
      h[3] != out[3]) {
    throw ShapeError("ConvLSTM state " + ShapeString(h) + " does not match input-path output " +
                     ShapeString({out[0], layer.hidden_channels, out[2], out[3]}) +
                     " (batch/spatial axes must agree)");
  }
  const Var<T> act = LstmGates(input, layer.input.weight, layer.input.bias, layer.input.spec,
                               state.hidden, layer.hidden.weight, layer.hidden.spec);
  Var<T> cell = LstmCellUpdate(act, state.cell);
  Var<T> hidden = LstmHidden(act, cell);
  return {std::move(hidden), std::move(cell)};
}

#define DRASIC_INSTANTIATE_CONVLSTM(T)                                                          \
  template struct ConvLayer<T>;                                                                 \
  template struct ConvLstmLayer<T>;                                                             \
  template ConvLayer<T> MakeConvLayer<T>(const ConvSpec&, bool, std::mt19937_64&);              \
  template ConvLstmLayer<T> MakeConvLstmLayer<T>(int, int, int, int, int, std::mt19937_64&);    \
  template ConvLstmState<T> ZeroConvLstmState<T>(int, int, int, int);                           \
  template ConvLstmState<T> ConvLstmCell(const Var<T>&, const ConvLstmState<T>&,                \
                                         const ConvLstmLayer<T>&);

DRASIC_INSTANTIATE_CONVLSTM(float)
DRASIC_INSTANTIATE_CONVLSTM(double)

#undef DRASIC_INSTANTIATE_CONVLSTM

}  // namespace drasic
