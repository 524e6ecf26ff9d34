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

#include "drasic/bitstream.h"

#include <fstream>
#include <iterator>
#include <string>

namespace drasic {
namespace {

constexpr char kMagic[4] = {'D', 'R', 'S', 'C'};

void PutLE(std::vector<std::uint8_t>& out, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t GetLE(std::span<const std::uint8_t> bytes, std::size_t& pos, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= std::uint64_t{bytes[pos + i]} << (8 * i);
  pos += static_cast<std::size_t>(width);
  return v;
}

void CheckRange(int value, int lo, int hi, const char* field) {
  if (value < lo || value > hi) {
    throw FormatError(std::string("stream header ") + field + " = " + std::to_string(value) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace

void StreamHeader::Validate() const {
  if (version != kVersion) throw FormatError("unsupported stream version " + std::to_string(version));
  CheckRange(orig_height, 1, 65535, "orig_height");
  CheckRange(orig_width, 1, 65535, "orig_width");
  CheckRange(padded_height, 8, 65535, "padded_height");
  CheckRange(padded_width, 8, 65535, "padded_width");
  if (padded_height % 8 != 0 || padded_width % 8 != 0) throw FormatError("padded dims must be divisible by 8");
  if (orig_height > padded_height || orig_width > padded_width) {
    throw FormatError("original dims exceed the padded canvas");
  }
  CheckRange(channels, 1, 255, "channels");
  CheckRange(code_channels, 1, 255, "code_channels");
  CheckRange(iterations, 1, 255, "iterations");
  CheckRange(source_id, 0, 65535, "source_id");
}

ScalableStream Pack(std::span<const CodeTensor> codes, StreamHeader header) {
  if (codes.empty()) throw FormatError("pack: no code blocks");
  header.iterations = static_cast<int>(codes.size());
  header.Validate();
  const Shape expected = header.CodeShape();
  ScalableStream stream{header, std::vector<std::uint8_t>(header.BytesPerBlock() * codes.size(), 0)};
  for (std::size_t t = 0; t < codes.size(); ++t) {
    if (codes[t].shape() != expected) {
      throw ShapeError("pack: code block " + std::to_string(t + 1) + " has shape " +
                       ShapeString(codes[t].shape()) + ", header implies " + ShapeString(expected));
    }
    if (codes[t].iteration() != static_cast<int>(t) + 1) {
      throw FormatError("pack: block " + std::to_string(t + 1) + " holds iteration " +
                        std::to_string(codes[t].iteration()));
    }
    std::uint8_t* block = stream.payload.data() + t * header.BytesPerBlock();
    const auto values = codes[t].values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] > 0) block[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
  }
  return stream;
}

std::vector<CodeTensor> Unpack(const ScalableStream& stream) {
  const StreamHeader& h = stream.header;
  h.Validate();
  if (stream.payload.size() != h.BytesPerBlock() * static_cast<std::size_t>(h.iterations)) {
    throw FormatError("unpack: payload of " + std::to_string(stream.payload.size()) + " bytes does not hold " +
                      std::to_string(h.iterations) + " blocks of " + std::to_string(h.BytesPerBlock()));
  }
  std::vector<CodeTensor> codes;
  for (int t = 0; t < h.iterations; ++t) {
    const std::uint8_t* block = stream.payload.data() + static_cast<std::size_t>(t) * h.BytesPerBlock();
    std::vector<std::int8_t> values(h.BitsPerBlock());
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = (block[i / 8] & (0x80u >> (i % 8))) ? 1 : -1;
    }
    codes.emplace_back(h.CodeShape(), std::move(values), t + 1);
  }
  return codes;
}

ScalableStream Truncate(const ScalableStream& stream, int t) {
  if (t < 1 || t > stream.header.iterations) {
    throw std::out_of_range("truncate: t = " + std::to_string(t) + " outside [1, " +
                            std::to_string(stream.header.iterations) + "]");
  }
  ScalableStream out;
  out.header = stream.header;
  out.header.iterations = t;
  const std::size_t bytes = stream.header.BytesPerBlock() * static_cast<std::size_t>(t);
  out.payload.assign(stream.payload.begin(), stream.payload.begin() + static_cast<std::ptrdiff_t>(bytes));
  return out;
}

double Bpp(const StreamHeader& header, int t, BppDenominator denominator) {
  if (t < 1 || t > header.iterations) {
    throw std::out_of_range("bpp: t = " + std::to_string(t) + " outside [1, " +
                            std::to_string(header.iterations) + "]");
  }
  const double pixels = denominator == BppDenominator::kPadded
                            ? static_cast<double>(header.padded_height) * header.padded_width
                            : static_cast<double>(header.orig_height) * header.orig_width;
  return static_cast<double>(t) * static_cast<double>(header.BitsPerBlock()) / pixels;
}

std::vector<std::uint8_t> SerializeStream(const ScalableStream& stream) {
  const StreamHeader& h = stream.header;
  h.Validate();
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  out.push_back(h.version);
  for (int v : {h.orig_height, h.orig_width, h.padded_height, h.padded_width}) {
    PutLE(out, static_cast<std::uint64_t>(v), 2);
  }
  for (int v : {h.channels, h.code_channels, h.iterations}) out.push_back(static_cast<std::uint8_t>(v));
  PutLE(out, static_cast<std::uint64_t>(h.source_id), 2);
  PutLE(out, h.model_hash, 8);
  out.insert(out.end(), stream.payload.begin(), stream.payload.end());
  return out;
}

ScalableStream ParseStream(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw FormatError("not a scalable stream (bad magic)");
  }
  if (bytes.size() < StreamHeader::kBytes) throw FormatError("stream header truncated");
  ScalableStream s;
  StreamHeader& h = s.header;
  std::size_t pos = 4;
  h.version = bytes[pos++];
  if (h.version != StreamHeader::kVersion) {
    throw FormatError("unsupported stream version " + std::to_string(h.version));
  }
  for (int* v : {&h.orig_height, &h.orig_width, &h.padded_height, &h.padded_width}) {
    *v = static_cast<int>(GetLE(bytes, pos, 2));
  }
  for (int* v : {&h.channels, &h.code_channels, &h.iterations}) *v = bytes[pos++];
  h.source_id = static_cast<int>(GetLE(bytes, pos, 2));
  h.model_hash = GetLE(bytes, pos, 8);
  h.Validate();
  const std::size_t payload = bytes.size() - pos;
  if (payload != h.BytesPerBlock() * static_cast<std::size_t>(h.iterations)) {
    throw FormatError("stream payload is " + std::to_string(payload) + " bytes; header declares " +
                      std::to_string(h.iterations) + " blocks of " + std::to_string(h.BytesPerBlock()));
  }
  s.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return s;
}

void WriteStream(const ScalableStream& stream, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = SerializeStream(stream);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

ScalableStream ReadStream(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open stream " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ParseStream(bytes);
}

}  // namespace drasic
