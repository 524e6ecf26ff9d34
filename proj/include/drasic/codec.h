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

// Recurrent residual autoencoder.
//
// Each iteration encodes the current residual x_t into a tanh-bounded
// bottleneck z_t, binarizes it to codes in {-1, +1}, decodes the codes into
// x~_t and feeds x_{t+1} = x_t - x~_t to the next iteration. Encoder and
// decoder both carry ConvLSTM state across iterations. The reconstruction
// after t iterations is the running sum of the decoder outputs.
//
// Pixels in [0, 1] are centred to [-0.5, 0.5] before the first iteration.
// The centred input and every decoder output are snapped to a 2^-18 grid so
// that residual and reconstruction bookkeeping is exact in floating point:
// x_1 == reconstruction_t + x_{t+1} holds bit-for-bit for every t.

#ifndef DRASIC_CODEC_H_
#define DRASIC_CODEC_H_

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "drasic/convlstm.h"

namespace drasic {

enum class BinarizeMode { kStochastic, kDeterministic };

// Architecture of one encoder/decoder pair. Three stride-2 stages on each
// side give an 8x spatial reduction between image and code.
struct CodecConfig {
  int image_channels = 1;
  int height = 32;  // padded canvas
  int width = 32;
  int code_channels = 2;
  int iterations = 16;
  int stem_channels = 32;
  std::array<int, 2> encoder_rnn = {64, 96};
  int decoder_head = 96;
  std::array<int, 3> decoder_rnn = {64, 64, 64};  // each divisible by 4
  int kernel_size = 3;
  int hidden_kernel_size = 1;

  static constexpr int kMaxIterations = 63;

  void Validate() const;
  int code_height() const { return height / 8; }
  int code_width() const { return width / 8; }
  std::size_t BitsPerIteration() const {
    return static_cast<std::size_t>(code_channels) * code_height() * code_width();
  }
  // FNV-1a over every architecture field.
  std::uint64_t ArchitectureHash() const;

  bool operator==(const CodecConfig&) const = default;
};

// Values in {-1, +1} for one iteration, shape (batch, code_channels, h/8, w/8).
class CodeTensor {
 public:
  CodeTensor() = default;
  // Throws ShapeError when any value is not exactly -1 or +1.
  CodeTensor(Shape shape, std::vector<std::int8_t> values, int iteration);

  template <typename T>
  static CodeTensor FromTensor(const Tensor<T>& values, int iteration);
  template <typename T>
  Tensor<T> ToTensor() const;

  const Shape& shape() const { return shape_; }
  std::span<const std::int8_t> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  // 1-based position in the scalable code sequence.
  int iteration() const { return iteration_; }
  CodeTensor SliceBatch(int begin, int count) const;

  bool operator==(const CodeTensor&) const = default;

 private:
  Shape shape_;
  std::vector<std::int8_t> values_;
  int iteration_ = 0;
};

template <typename T>
struct EncoderParams {
  ConvLayer<T> stem;
  std::array<ConvLstmLayer<T>, 2> rnn;
  ConvLayer<T> bottleneck;
  std::uint64_t architecture_hash = 0;

  std::vector<NamedParameter<T>> Parameters();
};

template <typename T>
struct DecoderParams {
  ConvLayer<T> head;
  std::array<ConvLstmLayer<T>, 3> rnn;
  ConvLayer<T> output;
  std::uint64_t architecture_hash = 0;

  std::vector<NamedParameter<T>> Parameters();
};

template <typename T>
EncoderParams<T> InitEncoder(const CodecConfig& config, std::mt19937_64& rng);
template <typename T>
DecoderParams<T> InitDecoder(const CodecConfig& config, std::mt19937_64& rng);

// FNV-1a over the architecture hash and every parameter value.
template <typename T>
std::uint64_t ParameterHash(std::uint64_t architecture_hash, std::span<const NamedParameter<T>> params);

template <typename T>
struct EncoderState {
  std::array<ConvLstmState<T>, 2> rnn;
};

template <typename T>
struct DecoderState {
  std::array<ConvLstmState<T>, 3> rnn;
};

// Zero state for images of the given (padded) spatial size.
template <typename T>
EncoderState<T> ZeroEncoderState(const EncoderParams<T>& params, int batch, int height, int width);
template <typename T>
DecoderState<T> ZeroDecoderState(const DecoderParams<T>& params, int batch, int code_height,
                                 int code_width);

// z_t = f(x_t; theta). Height and width of x_t must be multiples of 8.
template <typename T>
Var<T> EncodeStep(const Var<T>& residual, EncoderState<T>& state, const EncoderParams<T>& params);

// x~_t = g(b_t; phi); output has 8x the code's spatial size.
template <typename T>
Var<T> DecodeStep(const Var<T>& codes, DecoderState<T>& state, const DecoderParams<T>& params);

// Stochastic: +1 with probability (1 + z) / 2. Deterministic: sign(z) with
// sign(0) = +1. Rejects |z| > 1 and non-finite values. `rng` is only used
// in stochastic mode.
template <typename T>
CodeTensor Binarize(const Tensor<T>& z, BinarizeMode mode, std::mt19937_64* rng, int iteration = 1);

// Records the forward offset (quantized - input) of every straight-through
// quantizer in call order, or replays recorded offsets in place of the
// quantizers. Replay turns the graph into a smooth function whose exact
// gradient equals the straight-through gradient at the recorded point,
// which is what finite differences need.
template <typename T>
class QuantizerTape {
 public:
  enum class Mode { kRecord, kReplay };

  void StartRecording() { mode_ = Mode::kRecord; offsets_.clear(); cursor_ = 0; }
  void StartReplay() { mode_ = Mode::kReplay; cursor_ = 0; }
  Tensor<T> Apply(const Tensor<T>& input, const std::function<Tensor<T>()>& quantize);

 private:
  Mode mode_ = Mode::kRecord;
  std::vector<Tensor<T>> offsets_;
  std::size_t cursor_ = 0;
};

// Binarizer with a straight-through gradient.
template <typename T>
Var<T> BinarizeST(const Var<T>& z, BinarizeMode mode, std::mt19937_64* rng,
                  QuantizerTape<T>* tape = nullptr);

// Rounds to the nearest multiple of 2^-18.
template <typename T>
Tensor<T> SnapToLattice(const Tensor<T>& x);
template <typename T>
Var<T> SnapToLatticeST(const Var<T>& x, QuantizerTape<T>* tape = nullptr);

// Image conversions. `images` are in [0, 1].
template <typename T>
Tensor<T> CenterPixels(const Tensor<T>& images);
// clip(reconstruction + 0.5, 0, 1)
template <typename T>
Tensor<T> ReconstructionToPixels(const Tensor<T>& reconstruction);
// Zero-pads (N, C, h, w) images to (N, C, height, width), centred.
template <typename T>
Tensor<T> PadToCanvas(const Tensor<T>& images, int height, int width);

// Per-source unrolled recurrence with its graph.
template <typename T>
struct SourceRollout {
  std::vector<Var<T>> codes;            // b_1 .. b_T
  std::vector<Var<T>> reconstructions;  // sum_{i<=t} x~_i for t = 1 .. T
  std::vector<Var<T>> residuals;        // x_1 .. x_{T+1}
};

// Runs T iterations for M sources, each with its own encoder, through one
// decoder. Codes from all sources are concatenated along the batch axis and
// decoded together; with a single source this is the plain recurrence.
// `centered_inputs` are already centred and lattice-snapped.
template <typename T>
std::vector<SourceRollout<T>> RolloutSharedDecoder(std::span<const Tensor<T>> centered_inputs,
                                                   std::span<const EncoderParams<T>* const> encoders,
                                                   const DecoderParams<T>& decoder, int iterations,
                                                   BinarizeMode mode, std::mt19937_64* rng,
                                                   QuantizerTape<T>* tape = nullptr);

template <typename T>
struct CompressionTrace {
  std::vector<CodeTensor> codes;            // T entries
  std::vector<Tensor<T>> partial_recons;    // sum_{i<=t} x~_i, centred domain
  std::vector<Tensor<T>> residuals;         // x_1 .. x_T, centred domain
  Tensor<T> final_residual;                 // x_{T+1}
};

// Compresses padded images in [0, 1] without recording a graph.
template <typename T>
CompressionTrace<T> Compress(const Tensor<T>& images, int iterations, const EncoderParams<T>& encoder,
                             const DecoderParams<T>& decoder, BinarizeMode mode,
                             std::mt19937_64* rng = nullptr);

// Replays the decoder on a contiguous code prefix (iterations 1 .. t) and
// returns the centred reconstruction after t iterations. Rejects anything
// that is not a prefix.
template <typename T>
Tensor<T> ReconstructPrefix(std::span<const CodeTensor> codes, const DecoderParams<T>& decoder);

}  // namespace drasic

#endif  // DRASIC_CODEC_H_
