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

#include "drasic/config_file.h"

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace drasic {
namespace {

std::string_view Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <typename Int>
Int ParseInt(std::string_view key, std::string_view value) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument("config key '" + std::string(key) + "': '" + std::string(value) +
                                "' is not an integer");
  }
  return out;
}

double ParseDouble(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(std::string(value), &used);
    if (used == value.size()) return out;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config key '" + std::string(key) + "': '" + std::string(value) +
                              "' is not a number");
}

template <std::size_t N>
std::array<int, N> ParseList(std::string_view key, std::string_view value) {
  std::vector<std::string_view> parts;
  for (std::size_t comma; (comma = value.find(',')) != std::string_view::npos; value = value.substr(comma + 1)) {
    parts.push_back(Trim(value.substr(0, comma)));
  }
  parts.push_back(Trim(value));
  if (parts.size() != N) {
    throw std::invalid_argument("config key '" + std::string(key) + "' needs " + std::to_string(N) +
                                " comma-separated integers");
  }
  std::array<int, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = ParseInt<int>(key, parts[i]);
  return out;
}

template <std::size_t N>
std::string JoinList(const std::array<int, N>& values) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) out += (i ? "," : "") + std::to_string(values[i]);
  return out;
}

}  // namespace

void ApplyConfigValue(TrainConfig& c, std::string_view key, std::string_view value) {
  value = Trim(value);
  if (key == "regime") c.regime = ParseRegime(value);
  else if (key == "M") c.num_sources = ParseInt<int>(key, value);
  else if (key == "T") c.iterations = c.codec.iterations = ParseInt<int>(key, value);
  else if (key == "batch_size") c.batch_size = ParseInt<int>(key, value);
  else if (key == "epochs") c.epochs = ParseInt<int>(key, value);
  else if (key == "base_lr") c.base_lr = ParseDouble(key, value);
  else if (key == "decay_factor") c.decay_factor = ParseDouble(key, value);
  else if (key == "decay_every") c.decay_every = ParseInt<int>(key, value);
  else if (key == "seed") c.seed = ParseInt<std::uint64_t>(key, value);
  else if (key == "loss_kind") c.loss_kind = ParseLossKind(value);
  else if (key == "limit") c.limit_per_source = ParseInt<int>(key, value);
  else if (key == "image_channels") c.codec.image_channels = ParseInt<int>(key, value);
  else if (key == "height") c.codec.height = ParseInt<int>(key, value);
  else if (key == "width") c.codec.width = ParseInt<int>(key, value);
  else if (key == "code_channels") c.codec.code_channels = ParseInt<int>(key, value);
  else if (key == "stem_channels") c.codec.stem_channels = ParseInt<int>(key, value);
  else if (key == "encoder_rnn") c.codec.encoder_rnn = ParseList<2>(key, value);
  else if (key == "decoder_head") c.codec.decoder_head = ParseInt<int>(key, value);
  else if (key == "decoder_rnn") c.codec.decoder_rnn = ParseList<3>(key, value);
  else if (key == "kernel_size") c.codec.kernel_size = ParseInt<int>(key, value);
  else if (key == "hidden_kernel_size") c.codec.hidden_kernel_size = ParseInt<int>(key, value);
  else throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

TrainConfig ParseTrainConfig(std::string_view text, TrainConfig base) {
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);
    line = Trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      ApplyConfigValue(base, Trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.Validate();
  return base;
}

TrainConfig LoadTrainConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseTrainConfig(buffer.str());
}

std::string FormatTrainConfig(const TrainConfig& c) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "regime = " << RegimeName(c.regime) << '\n'
      << "M = " << c.num_sources << '\n'
      << "T = " << c.iterations << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "epochs = " << c.epochs << '\n'
      << "base_lr = " << c.base_lr << '\n'
      << "decay_factor = " << c.decay_factor << '\n'
      << "decay_every = " << c.decay_every << '\n'
      << "seed = " << c.seed << '\n'
      << "loss_kind = " << LossKindName(c.loss_kind) << '\n'
      << "limit = " << c.limit_per_source << '\n'
      << "image_channels = " << c.codec.image_channels << '\n'
      << "height = " << c.codec.height << '\n'
      << "width = " << c.codec.width << '\n'
      << "code_channels = " << c.codec.code_channels << '\n'
      << "stem_channels = " << c.codec.stem_channels << '\n'
      << "encoder_rnn = " << JoinList(c.codec.encoder_rnn) << '\n'
      << "decoder_head = " << c.codec.decoder_head << '\n'
      << "decoder_rnn = " << JoinList(c.codec.decoder_rnn) << '\n'
      << "kernel_size = " << c.codec.kernel_size << '\n'
      << "hidden_kernel_size = " << c.codec.hidden_kernel_size << '\n';
  return out.str();
}

}  // namespace drasic
