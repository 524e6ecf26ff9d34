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

#include "drasic/codec.h"

#include <cmath>
#include <cstring>
#include <string>

namespace drasic {
namespace {

constexpr double kLatticeScale = 262144.0;  // 2^18

class Fnv1a {
 public:
  void Bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  // Little-endian regardless of host order.
  void U64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    Bytes(b, 8);
  }
  void I32(int v) {
    const auto u = static_cast<std::uint32_t>(v);
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    Bytes(b, 4);
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

void CheckImageBatch(const Shape& shape, int channels, const char* what) {
  if (shape.size() != 4) {
    throw ShapeError(std::string(what) + ": expected (batch, channel, height, width), got " +
                     ShapeString(shape));
  }
  if (shape[1] != channels) {
    throw ShapeError(std::string(what) + ": channel axis is " + std::to_string(shape[1]) +
                     ", expected " + std::to_string(channels));
  }
  if (shape[2] % 8 != 0 || shape[3] % 8 != 0) {
    throw ShapeError(std::string(what) + ": height/width " + std::to_string(shape[2]) + "x" +
                     std::to_string(shape[3]) + " not divisible by 8; pad the images first");
  }
}

}  // namespace

void CodecConfig::Validate() const {
  if (image_channels < 1) throw ShapeError("image_channels must be >= 1");
  if (height < 8 || width < 8 || height % 8 != 0 || width % 8 != 0) {
    throw ShapeError("canvas " + std::to_string(height) + "x" + std::to_string(width) +
                     " must be a positive multiple of 8 in both axes");
  }
  if (code_channels < 1) throw ShapeError("code_channels must be >= 1");
  if (iterations < 1 || iterations > kMaxIterations) {
    throw ShapeError("iterations must be in [1, " + std::to_string(kMaxIterations) + "]");
  }
  if (stem_channels < 1 || decoder_head < 1) throw ShapeError("layer widths must be >= 1");
  for (int c : encoder_rnn) {
    if (c < 1) throw ShapeError("encoder ConvLSTM widths must be >= 1");
  }
  for (int c : decoder_rnn) {
    if (c < 4 || c % 4 != 0) throw ShapeError("decoder ConvLSTM widths must be positive multiples of 4");
  }
  if (kernel_size < 1 || kernel_size % 2 == 0) throw ShapeError("kernel_size must be odd");
  if (hidden_kernel_size < 1 || hidden_kernel_size % 2 == 0) {
    throw ShapeError("hidden_kernel_size must be odd");
  }
}

std::uint64_t CodecConfig::ArchitectureHash() const {
  Fnv1a h;
  for (int v : {image_channels, height, width, code_channels, stem_channels, encoder_rnn[0],
                encoder_rnn[1], decoder_head, decoder_rnn[0], decoder_rnn[1], decoder_rnn[2], kernel_size,
                hidden_kernel_size}) {
    h.I32(v);
  }
  return h.value();
}

CodeTensor::CodeTensor(Shape shape, std::vector<std::int8_t> values, int iteration)
    : shape_(std::move(shape)), values_(std::move(values)), iteration_(iteration) {
  if (ShapeSize(shape_) != values_.size()) throw ShapeError("code tensor size does not match shape");
  for (std::int8_t v : values_) {
    if (v != 1 && v != -1) throw ShapeError("code values must be exactly -1 or +1");
  }
}

template <typename T>
CodeTensor CodeTensor::FromTensor(const Tensor<T>& values, int iteration) {
  std::vector<std::int8_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == T{1}) {
      out[i] = 1;
    } else if (values[i] == T{-1}) {
      out[i] = -1;
    } else {
      throw ShapeError("code value " + std::to_string(values[i]) + " is not -1 or +1");
    }
  }
  return CodeTensor(values.shape(), std::move(out), iteration);
}

template <typename T>
Tensor<T> CodeTensor::ToTensor() const {
  return Tensor<T>(shape_, std::vector<T>(values_.begin(), values_.end()));
}

CodeTensor CodeTensor::SliceBatch(int begin, int count) const {
  if (shape_.empty() || begin < 0 || count <= 0 || begin + count > shape_[0]) {
    throw ShapeError("code batch slice out of range");
  }
  const std::size_t per = values_.size() / shape_[0];
  Shape shape = shape_;
  shape[0] = count;
  return CodeTensor(std::move(shape),
                    std::vector<std::int8_t>(values_.begin() + per * begin, values_.begin() + per * (begin + count)),
                    iteration_);
}

template <typename T>
std::vector<NamedParameter<T>> EncoderParams<T>::Parameters() {
  std::vector<NamedParameter<T>> out;
  stem.AppendParameters("encoder.stem", out);
  rnn[0].AppendParameters("encoder.rnn1", out);
  rnn[1].AppendParameters("encoder.rnn2", out);
  bottleneck.AppendParameters("encoder.bottleneck", out);
  return out;
}

template <typename T>
std::vector<NamedParameter<T>> DecoderParams<T>::Parameters() {
  std::vector<NamedParameter<T>> out;
  head.AppendParameters("decoder.head", out);
  for (std::size_t k = 0; k < rnn.size(); ++k) rnn[k].AppendParameters("decoder.rnn" + std::to_string(k + 1), out);
  output.AppendParameters("decoder.output", out);
  return out;
}

template <typename T>
EncoderParams<T> InitEncoder(const CodecConfig& config, std::mt19937_64& rng) {
  config.Validate();
  const int k = config.kernel_size;
  EncoderParams<T> p;
  p.stem = MakeConvLayer<T>(ConvSpec{config.image_channels, config.stem_channels, k, 2, k / 2}, true, rng);
  p.rnn[0] = MakeConvLstmLayer<T>(config.stem_channels, config.encoder_rnn[0], k, 2,
                                  config.hidden_kernel_size, rng);
  p.rnn[1] = MakeConvLstmLayer<T>(config.encoder_rnn[0], config.encoder_rnn[1], k, 2,
                                  config.hidden_kernel_size, rng);
  p.bottleneck = MakeConvLayer<T>(ConvSpec{config.encoder_rnn[1], config.code_channels, 1, 1, 0}, true, rng);
  p.architecture_hash = config.ArchitectureHash();
  return p;
}

template <typename T>
DecoderParams<T> InitDecoder(const CodecConfig& config, std::mt19937_64& rng) {
  config.Validate();
  const int k = config.kernel_size;
  DecoderParams<T> p;
  p.head = MakeConvLayer<T>(ConvSpec{config.code_channels, config.decoder_head, 1, 1, 0}, true, rng);
  int in = config.decoder_head;
  for (std::size_t s = 0; s < p.rnn.size(); ++s) {
    p.rnn[s] = MakeConvLstmLayer<T>(in, config.decoder_rnn[s], k, 1, config.hidden_kernel_size, rng);
    in = config.decoder_rnn[s] / 4;  // after depth-to-space
  }
  p.output = MakeConvLayer<T>(ConvSpec{in, config.image_channels, k, 1, k / 2}, true, rng);
  p.architecture_hash = config.ArchitectureHash();
  return p;
}

template <typename T>
std::uint64_t ParameterHash(std::uint64_t architecture_hash, std::span<const NamedParameter<T>> params) {
  Fnv1a h;
  h.U64(architecture_hash);
  for (const auto& p : params) {
    const Tensor<T>& v = p.var->value();
    for (int d : v.shape()) h.I32(d);
    for (T x : v.values()) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &x, sizeof(T));
      h.U64(bits);
    }
  }
  return h.value();
}

template <typename T>
EncoderState<T> ZeroEncoderState(const EncoderParams<T>& params, int batch, int height, int width) {
  if (height % 8 != 0 || width % 8 != 0) throw ShapeError("encoder state needs a canvas divisible by 8");
  EncoderState<T> s;
  s.rnn[0] = ZeroConvLstmState<T>(batch, params.rnn[0].hidden_channels, height / 4, width / 4);
  s.rnn[1] = ZeroConvLstmState<T>(batch, params.rnn[1].hidden_channels, height / 8, width / 8);
  return s;
}

template <typename T>
DecoderState<T> ZeroDecoderState(const DecoderParams<T>& params, int batch, int code_height,
                                 int code_width) {
  DecoderState<T> s;
  for (std::size_t k = 0; k < s.rnn.size(); ++k) {
    s.rnn[k] = ZeroConvLstmState<T>(batch, params.rnn[k].hidden_channels, code_height << k, code_width << k);
  }
  return s;
}

template <typename T>
Var<T> EncodeStep(const Var<T>& residual, EncoderState<T>& state, const EncoderParams<T>& params) {
  CheckImageBatch(residual.shape(), params.stem.spec.in_channels, "encode_step");
  const Var<T> features = Tanh(params.stem(residual));
  state.rnn[0] = ConvLstmCell(features, state.rnn[0], params.rnn[0]);
  state.rnn[1] = ConvLstmCell(state.rnn[0].hidden, state.rnn[1], params.rnn[1]);
  return Tanh(params.bottleneck(state.rnn[1].hidden));
}

template <typename T>
Var<T> DecodeStep(const Var<T>& codes, DecoderState<T>& state, const DecoderParams<T>& params) {
  const Shape& s = codes.shape();
  if (s.size() != 4 || s[1] != params.head.spec.in_channels) {
    throw ShapeError("decode_step: code shape " + ShapeString(s) + " does not match decoder input of " +
                     std::to_string(params.head.spec.in_channels) + " channels");
  }
  Var<T> x = Tanh(params.head(codes));
  for (std::size_t k = 0; k < params.rnn.size(); ++k) {
    state.rnn[k] = ConvLstmCell(x, state.rnn[k], params.rnn[k]);
    x = DepthToSpace(state.rnn[k].hidden, 2);
  }
  return Tanh(params.output(x));
}

template <typename T>
CodeTensor Binarize(const Tensor<T>& z, BinarizeMode mode, std::mt19937_64* rng, int iteration) {
  if (mode == BinarizeMode::kStochastic && rng == nullptr) {
    throw std::invalid_argument("stochastic binarization needs a random generator");
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<std::int8_t> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const T v = z[i];
    if (!(std::abs(v) <= T{1})) {
      throw std::domain_error("binarize: input " + std::to_string(v) +
                              " outside [-1, 1] (missing tanh upstream?)");
    }
    if (mode == BinarizeMode::kDeterministic) {
      out[i] = v >= T{0} ? 1 : -1;
    } else {
      const double p_plus = (1.0 + static_cast<double>(v)) / 2.0;
      out[i] = uniform(*rng) < p_plus ? 1 : -1;
    }
  }
  return CodeTensor(z.shape(), std::move(out), iteration);
}

template <typename T>
Tensor<T> QuantizerTape<T>::Apply(const Tensor<T>& input, const std::function<Tensor<T>()>& quantize) {
  if (mode_ == Mode::kReplay) {
    if (cursor_ >= offsets_.size()) throw std::logic_error("quantizer tape exhausted during replay");
    const Tensor<T>& offset = offsets_[cursor_++];
    if (offset.shape() != input.shape()) throw ShapeError("quantizer tape shape mismatch during replay");
    Tensor<T> out = input;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += offset[i];
    return out;
  }
  Tensor<T> q = quantize();
  Tensor<T> offset = q;
  for (std::size_t i = 0; i < offset.size(); ++i) offset[i] -= input[i];
  offsets_.push_back(std::move(offset));
  return q;
}

template <typename T>
Var<T> BinarizeST(const Var<T>& z, BinarizeMode mode, std::mt19937_64* rng, QuantizerTape<T>* tape) {
  auto quantize = [&] { return Binarize(z.value(), mode, rng).template ToTensor<T>(); };
  Tensor<T> forward = tape ? tape->Apply(z.value(), quantize) : quantize();
  return StraightThrough(z, std::move(forward));
}

template <typename T>
Tensor<T> SnapToLattice(const Tensor<T>& x) {
  Tensor<T> out = x;
  const T scale = static_cast<T>(kLatticeScale);
  for (auto& v : out.values()) v = std::nearbyint(v * scale) / scale;
  return out;
}

template <typename T>
Var<T> SnapToLatticeST(const Var<T>& x, QuantizerTape<T>* tape) {
  auto quantize = [&] { return SnapToLattice(x.value()); };
  Tensor<T> forward = tape ? tape->Apply(x.value(), quantize) : quantize();
  return StraightThrough(x, std::move(forward));
}

template <typename T>
Tensor<T> CenterPixels(const Tensor<T>& images) {
  Tensor<T> out = images;
  for (auto& v : out.values()) v -= T{0.5};
  return out;
}

template <typename T>
Tensor<T> ReconstructionToPixels(const Tensor<T>& reconstruction) {
  Tensor<T> out = reconstruction;
  for (auto& v : out.values()) v = std::clamp(v + T{0.5}, T{0}, T{1});
  return out;
}

template <typename T>
Tensor<T> PadToCanvas(const Tensor<T>& images, int height, int width) {
  const Shape& s = images.shape();
  if (s.size() != 4 || s[2] > height || s[3] > width) {
    throw ShapeError("cannot pad " + ShapeString(s) + " to a " + std::to_string(height) + "x" +
                     std::to_string(width) + " canvas");
  }
  const int top = (height - s[2]) / 2;
  const int left = (width - s[3]) / 2;
  Tensor<T> out(Shape{s[0], s[1], height, width});
  for (int n = 0; n < s[0]; ++n)
    for (int c = 0; c < s[1]; ++c)
      for (int y = 0; y < s[2]; ++y)
        for (int x = 0; x < s[3]; ++x) out.at(n, c, y + top, x + left) = images.at(n, c, y, x);
  return out;
}

template <typename T>
std::vector<SourceRollout<T>> RolloutSharedDecoder(std::span<const Tensor<T>> centered_inputs,
                                                   std::span<const EncoderParams<T>* const> encoders,
                                                   const DecoderParams<T>& decoder, int iterations,
                                                   BinarizeMode mode, std::mt19937_64* rng,
                                                   QuantizerTape<T>* tape) {
  const std::size_t m_count = centered_inputs.size();
  if (m_count == 0 || encoders.size() != m_count) {
    throw std::invalid_argument("rollout needs one encoder per source (got " + std::to_string(encoders.size()) +
                                " encoders for " + std::to_string(m_count) + " sources)");
  }
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  const Shape& first = centered_inputs[0].shape();
  std::vector<SourceRollout<T>> out(m_count);
  std::vector<EncoderState<T>> enc_states;
  std::vector<Var<T>> residual(m_count);
  std::vector<int> offsets;
  int total_batch = 0;
  for (std::size_t m = 0; m < m_count; ++m) {
    const Shape& s = centered_inputs[m].shape();
    CheckImageBatch(s, encoders[m]->stem.spec.in_channels, "compress");
    if (s[1] != first[1] || s[2] != first[2] || s[3] != first[3]) {
      throw ShapeError("all sources must share image geometry");
    }
    if (encoders[m]->architecture_hash != decoder.architecture_hash) {
      throw ShapeError("encoder " + std::to_string(m) + " architecture does not match the decoder");
    }
    enc_states.push_back(ZeroEncoderState(*encoders[m], s[0], s[2], s[3]));
    residual[m] = Var<T>::Constant(centered_inputs[m]);
    out[m].residuals.push_back(residual[m]);
    offsets.push_back(total_batch);
    total_batch += s[0];
  }
  DecoderState<T> dec_state = ZeroDecoderState(decoder, total_batch, first[2] / 8, first[3] / 8);

  for (int t = 0; t < iterations; ++t) {
    std::vector<Var<T>> codes(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
      const Var<T> z = EncodeStep(residual[m], enc_states[m], *encoders[m]);
      codes[m] = BinarizeST(z, mode, rng, tape);
      out[m].codes.push_back(codes[m]);
    }
    const Var<T> joint_codes = m_count == 1 ? codes[0] : ConcatBatch<T>(codes);
    const Var<T> decoded = SnapToLatticeST(DecodeStep(joint_codes, dec_state, decoder), tape);
    for (std::size_t m = 0; m < m_count; ++m) {
      const Var<T> part =
          m_count == 1 ? decoded : SliceBatch(decoded, offsets[m], centered_inputs[m].shape()[0]);
      out[m].reconstructions.push_back(t == 0 ? part : out[m].reconstructions.back() + part);
      residual[m] = residual[m] - part;
      out[m].residuals.push_back(residual[m]);
    }
  }
  return out;
}

template <typename T>
CompressionTrace<T> Compress(const Tensor<T>& images, int iterations, const EncoderParams<T>& encoder,
                             const DecoderParams<T>& decoder, BinarizeMode mode, std::mt19937_64* rng) {
  NoGradGuard no_grad;
  const Tensor<T> centered = SnapToLattice(CenterPixels(images));
  const EncoderParams<T>* enc[] = {&encoder};
  auto rollouts = RolloutSharedDecoder<T>(std::span<const Tensor<T>>(&centered, 1), enc, decoder,
                                          iterations, mode, rng);
  SourceRollout<T>& r = rollouts[0];
  CompressionTrace<T> trace;
  for (int t = 0; t < iterations; ++t) {
    trace.codes.push_back(CodeTensor::FromTensor(r.codes[t].value(), t + 1));
    trace.partial_recons.push_back(r.reconstructions[t].value());
    trace.residuals.push_back(r.residuals[t].value());
  }
  trace.final_residual = r.residuals[iterations].value();
  return trace;
}

template <typename T>
Tensor<T> ReconstructPrefix(std::span<const CodeTensor> codes, const DecoderParams<T>& decoder) {
  if (codes.empty()) throw std::invalid_argument("reconstruct_prefix needs at least one code block");
  for (std::size_t k = 0; k < codes.size(); ++k) {
    if (codes[k].iteration() != static_cast<int>(k) + 1) {
      throw std::invalid_argument("code blocks must be the contiguous prefix 1..t; position " +
                                  std::to_string(k + 1) + " holds iteration " +
                                  std::to_string(codes[k].iteration()));
    }
    if (codes[k].shape() != codes[0].shape()) throw ShapeError("code blocks differ in shape");
  }
  NoGradGuard no_grad;
  const Shape& s = codes[0].shape();
  if (s.size() != 4) throw ShapeError("code blocks must be rank 4");
  DecoderState<T> state = ZeroDecoderState(decoder, s[0], s[2], s[3]);
  Var<T> recon;
  for (std::size_t k = 0; k < codes.size(); ++k) {
    const Var<T> b = Var<T>::Constant(codes[k].ToTensor<T>());
    const Var<T> decoded = SnapToLatticeST(DecodeStep(b, state, decoder));
    recon = k == 0 ? decoded : recon + decoded;
  }
  return recon.value();
}

#define DRASIC_INSTANTIATE_CODEC(T)                                                                   \
  template CodeTensor CodeTensor::FromTensor<T>(const Tensor<T>&, int);                               \
  template Tensor<T> CodeTensor::ToTensor<T>() const;                                                 \
  template struct EncoderParams<T>;                                                                   \
  template struct DecoderParams<T>;                                                                   \
  template class QuantizerTape<T>;                                                                    \
  template EncoderParams<T> InitEncoder<T>(const CodecConfig&, std::mt19937_64&);                     \
  template DecoderParams<T> InitDecoder<T>(const CodecConfig&, std::mt19937_64&);                     \
  template std::uint64_t ParameterHash<T>(std::uint64_t, std::span<const NamedParameter<T>>);          \
  template EncoderState<T> ZeroEncoderState(const EncoderParams<T>&, int, int, int);                  \
  template DecoderState<T> ZeroDecoderState(const DecoderParams<T>&, int, int, int);                  \
  template Var<T> EncodeStep(const Var<T>&, EncoderState<T>&, const EncoderParams<T>&);               \
  template Var<T> DecodeStep(const Var<T>&, DecoderState<T>&, const DecoderParams<T>&);               \
  template CodeTensor Binarize(const Tensor<T>&, BinarizeMode, std::mt19937_64*, int);                \
  template Var<T> BinarizeST(const Var<T>&, BinarizeMode, std::mt19937_64*, QuantizerTape<T>*);       \
  template Tensor<T> SnapToLattice(const Tensor<T>&);                                                 \
  template Var<T> SnapToLatticeST(const Var<T>&, QuantizerTape<T>*);                                  \
  template Tensor<T> CenterPixels(const Tensor<T>&);                                                  \
  template Tensor<T> ReconstructionToPixels(const Tensor<T>&);                                        \
  template Tensor<T> PadToCanvas(const Tensor<T>&, int, int);                                         \
  template std::vector<SourceRollout<T>> RolloutSharedDecoder(                                        \
      std::span<const Tensor<T>>, std::span<const EncoderParams<T>* const>, const DecoderParams<T>&,  \
      int, BinarizeMode, std::mt19937_64*, QuantizerTape<T>*);                                        \
  template CompressionTrace<T> Compress(const Tensor<T>&, int, const EncoderParams<T>&,               \
                                        const DecoderParams<T>&, BinarizeMode, std::mt19937_64*);     \
  template Tensor<T> ReconstructPrefix(std::span<const CodeTensor>, const DecoderParams<T>&);

DRASIC_INSTANTIATE_CODEC(float)
DRASIC_INSTANTIATE_CODEC(double)

#undef DRASIC_INSTANTIATE_CODEC

}  // namespace drasic
