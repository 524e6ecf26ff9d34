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

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "drasic/bitstream.h"
#include "test_util.h"

namespace drasic {
namespace {

std::vector<CodeTensor> RandomCodes(int t, std::uint64_t seed, const Shape& shape = {1, 2, 4, 4}) {
  std::mt19937_64 rng(seed);
  std::vector<CodeTensor> codes;
  for (int k = 1; k <= t; ++k) {
    std::vector<std::int8_t> v(ShapeSize(shape));
    for (auto& x : v) x = (rng() & 1) ? 1 : -1;
    codes.emplace_back(shape, std::move(v), k);
  }
  return codes;
}

StreamHeader Header() {
  StreamHeader h;
  h.source_id = 3;
  h.model_hash = 0x0123456789abcdefULL;
  return h;
}

TEST(PackTest, RoundTripsCodes) {
  const auto codes = RandomCodes(16, 1);
  const ScalableStream s = Pack(codes, Header());
  EXPECT_EQ(s.header.iterations, 16);
  EXPECT_EQ(Unpack(s), codes);
}

TEST(PackTest, SingleBlockIsFourBytes) {
  const auto codes = RandomCodes(1, 2);
  EXPECT_EQ(Pack(codes, Header()).payload.size(), 4u);
}

TEST(PackTest, AllPlusOneGivesAllOnesBytes) {
  std::vector<CodeTensor> codes;
  for (int k = 1; k <= 3; ++k) codes.emplace_back(Shape{1, 2, 4, 4}, std::vector<std::int8_t>(32, 1), k);
  for (auto b : Pack(codes, Header()).payload) EXPECT_EQ(b, 0xFF);
}

TEST(PackTest, PartialFinalBytePadsWithZeros) {
  StreamHeader h = Header();
  h.code_channels = 3;
  h.padded_height = 8;
  h.padded_width = 8;
  h.orig_height = 8;
  h.orig_width = 8;
  std::vector<CodeTensor> codes = {CodeTensor({1, 3, 1, 1}, {1, 1, 1}, 1), CodeTensor({1, 3, 1, 1}, {-1, 1, -1}, 2)};
  const ScalableStream s = Pack(codes, h);
  ASSERT_EQ(s.payload.size(), 2u);
  EXPECT_EQ(s.payload[0], 0xE0);  // MSB first, +1 -> 1
  EXPECT_EQ(s.payload[1], 0x40);
  EXPECT_EQ(Unpack(s), codes);
}

TEST(PackTest, RejectsWrongShapeAndOrder) {
  EXPECT_THROW(Pack(RandomCodes(2, 3, {1, 2, 2, 2}), Header()), ShapeError);
  auto codes = RandomCodes(3, 4);
  std::swap(codes[1], codes[2]);
  EXPECT_THROW(Pack(codes, Header()), FormatError);
  EXPECT_THROW(Pack({}, Header()), FormatError);
}

TEST(TruncateTest, PrefixSemantics) {
  const auto codes = RandomCodes(16, 5);
  const ScalableStream s = Pack(codes, Header());
  EXPECT_EQ(Truncate(s, 16), s);
  EXPECT_EQ(Truncate(Truncate(s, 8), 4), Truncate(s, 4));
  const auto prefix = Unpack(Truncate(s, 5));
  ASSERT_EQ(prefix.size(), 5u);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(prefix[k], codes[k]);
  EXPECT_EQ(Truncate(s, 5), Pack(std::span(codes).first(5), Header()));
  EXPECT_THROW(Truncate(s, 0), std::out_of_range);
  EXPECT_THROW(Truncate(s, 17), std::out_of_range);
}

TEST(BppTest, DefaultGeometry) {
  StreamHeader h = Header();
  h.iterations = 16;
  EXPECT_DOUBLE_EQ(Bpp(h, 1), 0.03125);
  EXPECT_DOUBLE_EQ(Bpp(h, 16), 0.5);
  for (int t = 1; t <= 16; ++t) EXPECT_DOUBLE_EQ(Bpp(h, t), 0.03125 * t);
  EXPECT_DOUBLE_EQ(Bpp(h, 1, BppDenominator::kOriginal), 32.0 / 784.0);
  EXPECT_THROW(Bpp(h, 17), std::out_of_range);
}

TEST(StreamFileTest, SerializeParseRoundTrip) {
  const ScalableStream s = Pack(RandomCodes(7, 6), Header());
  const auto bytes = SerializeStream(s);
  EXPECT_EQ(bytes.size(), StreamHeader::kBytes + s.payload.size());
  EXPECT_EQ(ParseStream(bytes), s);
  testing::TempDir dir("stream");
  WriteStream(s, dir / "a.drsc");
  EXPECT_EQ(ReadStream(dir / "a.drsc"), s);
}

TEST(StreamFileTest, RejectsCorruption) {
  const auto bytes = SerializeStream(Pack(RandomCodes(3, 7), Header()));
  auto bad = bytes;
  bad[0] ^= 0xFF;
  EXPECT_THROW(ParseStream(bad), FormatError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(ParseStream(bad), FormatError);
  bad = bytes;
  bad[4] = 99;  // version byte
  EXPECT_THROW(ParseStream(bad), FormatError);
  EXPECT_THROW(ParseStream(std::span(bytes).first(10)), FormatError);
  EXPECT_THROW(ReadStream("/nonexistent/stream.drsc"), FormatError);
}

TEST(StreamHeaderTest, ValidateRejectsBadFields) {
  StreamHeader h = Header();
  h.padded_height = 30;
  EXPECT_THROW(h.Validate(), FormatError);
  h = Header();
  h.orig_width = 40;
  EXPECT_THROW(h.Validate(), FormatError);
  h = Header();
  h.version = 2;
  EXPECT_THROW(h.Validate(), FormatError);
}

}  // namespace
}  // namespace drasic
