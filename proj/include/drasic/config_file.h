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

// Flat "key = value" training configuration files.
//
// Blank lines and text after '#' are ignored. Every key is optional and
// falls back to the TrainConfig default; unknown keys are rejected. List
// values (encoder_rnn, decoder_rnn) are comma separated.

#ifndef DRASIC_CONFIG_FILE_H_
#define DRASIC_CONFIG_FILE_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "drasic/training.h"

namespace drasic {

// Sets one field; `T` also sets the codec's iteration count. Throws
// std::invalid_argument for unknown keys or malformed values.
void ApplyConfigValue(TrainConfig& config, std::string_view key, std::string_view value);

TrainConfig ParseTrainConfig(std::string_view text, TrainConfig base = {});
TrainConfig LoadTrainConfig(const std::filesystem::path& path);
// Every key with its current value; parses back to an equal config.
std::string FormatTrainConfig(const TrainConfig& config);

}  // namespace drasic

#endif  // DRASIC_CONFIG_FILE_H_
