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

#include <cstring>
#include <fstream>
#include <iterator>

#include "drasic/training.h"

namespace drasic {
namespace {

constexpr char kMagic[4] = {'D', 'R', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t Fnv1a(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) h = (h ^ data[i]) * 0x100000001b3ULL;
  return h;
}

class Writer {
 public:
  void Raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void U(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void U8(std::uint8_t v) { U(v, 1); }
  void U32(std::uint32_t v) { U(v, 4); }
  void I32(int v) { U(static_cast<std::uint32_t>(v), 4); }
  void U64(std::uint64_t v) { U(v, 8); }
  void F64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    U64(bits);
  }
  void F32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    U32(bits);
  }
  void Str(const std::string& s) {
    U32(static_cast<std::uint32_t>(s.size()));
    Raw(s.data(), s.size());
  }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<unsigned char>& bytes, std::size_t end, std::string path)
      : bytes_(bytes), end_(end), path_(std::move(path)) {}

  void Need(std::size_t n) {
    if (pos_ + n > end_) {
      throw FormatError(path_ + ": checkpoint truncated at byte " + std::to_string(pos_) + " (needs " +
                        std::to_string(n) + " more)");
    }
  }
  std::uint64_t U(int width) {
    Need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint8_t U8() { return static_cast<std::uint8_t>(U(1)); }
  std::uint32_t U32() { return static_cast<std::uint32_t>(U(4)); }
  int I32() { return static_cast<int>(static_cast<std::uint32_t>(U(4))); }
  std::uint64_t U64() { return U(8); }
  double F64() {
    const std::uint64_t bits = U64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  float F32() {
    const std::uint32_t bits = U32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string Str() {
    const std::uint32_t n = U32();
    Need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  const std::string& path() const { return path_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
  std::string path_;
};

void WriteConfig(Writer& w, const TrainConfig& c) {
  w.U8(static_cast<std::uint8_t>(c.regime));
  w.U8(static_cast<std::uint8_t>(c.loss_kind));
  for (int v : {c.num_sources, c.iterations, c.batch_size, c.epochs, c.decay_every, c.limit_per_source}) w.I32(v);
  w.F64(c.base_lr);
  w.F64(c.decay_factor);
  w.U64(c.seed);
  const CodecConfig& k = c.codec;
  for (int v : {k.image_channels, k.height, k.width, k.code_channels, k.iterations, k.stem_channels,
                k.encoder_rnn[0], k.encoder_rnn[1], k.decoder_head, k.decoder_rnn[0], k.decoder_rnn[1],
                k.decoder_rnn[2], k.kernel_size, k.hidden_kernel_size}) {
    w.I32(v);
  }
}

TrainConfig ReadConfig(Reader& r) {
  TrainConfig c;
  const std::uint8_t regime = r.U8();
  const std::uint8_t loss = r.U8();
  if (regime > 2 || loss > 1) throw FormatError(r.path() + ": invalid regime or loss tag");
  c.regime = static_cast<Regime>(regime);
  c.loss_kind = static_cast<LossKind>(loss);
  for (int* v : {&c.num_sources, &c.iterations, &c.batch_size, &c.epochs, &c.decay_every, &c.limit_per_source}) {
    *v = r.I32();
  }
  c.base_lr = r.F64();
  c.decay_factor = r.F64();
  c.seed = r.U64();
  CodecConfig& k = c.codec;
  for (int* v : {&k.image_channels, &k.height, &k.width, &k.code_channels, &k.iterations, &k.stem_channels,
                 &k.encoder_rnn[0], &k.encoder_rnn[1], &k.decoder_head, &k.decoder_rnn[0], &k.decoder_rnn[1],
                 &k.decoder_rnn[2], &k.kernel_size, &k.hidden_kernel_size}) {
    *v = r.I32();
  }
  try {
    c.Validate();
  } catch (const std::exception& e) {
    throw FormatError(r.path() + ": stored config is invalid: " + e.what());
  }
  return c;
}

void WriteParams(Writer& w, std::vector<NamedParameter<float>> params) {
  w.U32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    const Tensor<float>& v = p.var->value();
    w.Str(p.name);
    w.U32(static_cast<std::uint32_t>(v.rank()));
    for (int d : v.shape()) w.I32(d);
    for (float x : v.values()) w.F32(x);
  }
}

void ReadParams(Reader& r, std::vector<NamedParameter<float>> params) {
  const std::uint32_t count = r.U32();
  if (count != params.size()) {
    throw FormatError(r.path() + ": parameter count " + std::to_string(count) + " does not match the " +
                      "architecture (" + std::to_string(params.size()) + ")");
  }
  for (auto& p : params) {
    const std::string name = r.Str();
    if (name != p.name) throw FormatError(r.path() + ": expected tensor " + p.name + ", found " + name);
    const std::uint32_t rank = r.U32();
    Shape shape;
    for (std::uint32_t i = 0; i < rank && i < 8; ++i) shape.push_back(r.I32());
    if (shape != p.var->shape()) {
      throw FormatError(r.path() + ": tensor " + name + " has shape " + ShapeString(shape) + ", expected " +
                        ShapeString(p.var->shape()));
    }
    Tensor<float>& v = p.var->mutable_value();
    for (float& x : v.values()) x = r.F32();
  }
}

}  // namespace

void SaveCheckpoint(const TrainedSystem& system, const std::filesystem::path& path) {
  Writer w;
  w.Raw(kMagic, 4);
  w.U32(kVersion);
  WriteConfig(w, system.config);
  auto& mutable_system = const_cast<TrainedSystem&>(system);
  w.U32(static_cast<std::uint32_t>(system.encoders.size()));
  w.U32(static_cast<std::uint32_t>(system.decoders.size()));
  for (auto& e : mutable_system.encoders) WriteParams(w, e.Parameters());
  for (auto& d : mutable_system.decoders) WriteParams(w, d.Parameters());
  w.U32(static_cast<std::uint32_t>(system.epoch_losses.size()));
  for (double l : system.epoch_losses) w.F64(l);
  w.U64(Fnv1a(w.bytes().data(), w.bytes().size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw FormatError("failed writing checkpoint " + path.string());
}

TrainedSystem LoadCheckpoint(const std::filesystem::path& path, std::optional<Regime> expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(name + ": not a checkpoint (bad magic)");
  }
  if (bytes.size() < 16) throw FormatError(name + ": checkpoint truncated");
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= std::uint64_t{bytes[bytes.size() - 8 + i]} << (8 * i);
  if (stored != Fnv1a(bytes.data(), bytes.size() - 8)) {
    throw FormatError(name + ": checksum mismatch (file truncated or corrupted)");
  }
  Reader r(bytes, bytes.size() - 8, name);
  r.U32();  // magic
  const std::uint32_t version = r.U32();
  if (version != kVersion) {
    throw FormatError(name + ": checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kVersion) + ")");
  }
  const TrainConfig config = ReadConfig(r);
  if (expected.has_value() && *expected != config.regime) {
    throw FormatError(name + ": checkpoint holds a " + std::string(RegimeName(config.regime)) +
                      " system, not " + std::string(RegimeName(*expected)));
  }
  TrainedSystem system = InitSystem(config);
  if (r.U32() != system.encoders.size() || r.U32() != system.decoders.size()) {
    throw FormatError(name + ": encoder/decoder counts do not match the regime");
  }
  for (auto& e : system.encoders) ReadParams(r, e.Parameters());
  for (auto& d : system.decoders) ReadParams(r, d.Parameters());
  const std::uint32_t epochs = r.U32();
  r.Need(static_cast<std::size_t>(epochs) * 8);
  for (std::uint32_t i = 0; i < epochs; ++i) system.epoch_losses.push_back(r.F64());
  if (r.pos() != bytes.size() - 8) throw FormatError(name + ": unexpected trailing bytes");
  return system;
}

}  // namespace drasic
