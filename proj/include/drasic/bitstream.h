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

// Scalable code container for one image.
//
// Layout (little-endian):
//   "DRSC" | version u8 | orig_h u16 | orig_w u16 | padded_h u16 | padded_w u16
//   | channels u8 | code_channels u8 | iterations u8 | source_id u16
//   | model_hash u64 | payload
// The payload holds one fixed-size block per iteration, in iteration order,
// so the first t blocks are a valid stream for t iterations. Inside a block
// codes are flattened channel-major then row-major and packed MSB first,
// +1 as bit 1 and -1 as bit 0; the last byte is zero padded.

#ifndef DRASIC_BITSTREAM_H_
#define DRASIC_BITSTREAM_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "drasic/codec.h"

namespace drasic {

struct StreamHeader {
  static constexpr std::uint8_t kVersion = 1;
  static constexpr std::size_t kBytes = 26;

  std::uint8_t version = kVersion;
  int orig_height = 28;
  int orig_width = 28;
  int padded_height = 32;
  int padded_width = 32;
  int channels = 1;
  int code_channels = 2;
  int iterations = 1;  // blocks stored
  int source_id = 0;
  std::uint64_t model_hash = 0;

  // Throws FormatError when a field is out of range.
  void Validate() const;
  std::size_t BitsPerBlock() const {
    return static_cast<std::size_t>(code_channels) * (padded_height / 8) * (padded_width / 8);
  }
  std::size_t BytesPerBlock() const { return (BitsPerBlock() + 7) / 8; }
  Shape CodeShape() const { return {1, code_channels, padded_height / 8, padded_width / 8}; }

  bool operator==(const StreamHeader&) const = default;
};

struct ScalableStream {
  StreamHeader header;
  std::vector<std::uint8_t> payload;

  bool operator==(const ScalableStream&) const = default;
};

// `codes` are iterations 1..T of a single image; header.iterations is set
// to T. Rejects shapes that disagree with the header.
ScalableStream Pack(std::span<const CodeTensor> codes, StreamHeader header);
std::vector<CodeTensor> Unpack(const ScalableStream& stream);
// Keeps the first t blocks; 1 <= t <= stored iterations.
ScalableStream Truncate(const ScalableStream& stream, int t);

enum class BppDenominator { kPadded, kOriginal };
// Bits sent after t iterations per pixel of the padded (default) or
// original canvas.
double Bpp(const StreamHeader& header, int t, BppDenominator denominator = BppDenominator::kPadded);

std::vector<std::uint8_t> SerializeStream(const ScalableStream& stream);
// Rejects bad magic, unknown versions and payloads whose length is not a
// whole number of blocks matching the header.
ScalableStream ParseStream(std::span<const std::uint8_t> bytes);
void WriteStream(const ScalableStream& stream, const std::filesystem::path& path);
ScalableStream ReadStream(const std::filesystem::path& path);

}  // namespace drasic

#endif  // DRASIC_BITSTREAM_H_
