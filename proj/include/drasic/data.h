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

// MNIST ingestion, source splits and inter-source correlation.

#ifndef DRASIC_DATA_H_
#define DRASIC_DATA_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drasic/tensor.h"

namespace drasic {

// Native 28x28 images with pixels in [0, 1], in file order.
struct Dataset {
  std::string name;
  std::string split;  // "train" or "test"
  Tensor<float> images;  // (N, 1, 28, 28)
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
  // Images at the given indices, in that order.
  Dataset Subset(std::span<const int> indices) const;
};

// $DRASIC_DATA_DIR, else ~/.cache/drasic/mnist.
std::filesystem::path DefaultDataDir();

// Loads MNIST ("mnist") from IDX files in `dir`. Both the dash and dot file
// naming variants are accepted, optionally gzip-compressed. The SHA-256 of
// the decompressed bytes must match the canonical release; DataError
// otherwise, naming the file and the expected checksum.
Dataset LoadDataset(std::string_view name, std::string_view split,
                    const std::filesystem::path& dir = DefaultDataDir());

// Parses an IDX image (magic 2051) or label (magic 2049) payload.
Tensor<float> ParseIdxImages(std::span<const unsigned char> bytes);
std::vector<int> ParseIdxLabels(std::span<const unsigned char> bytes);

std::string Sha256Hex(std::span<const unsigned char> bytes);

// (file stem, SHA-256) of the canonical image and label files of a split.
std::vector<std::pair<std::string, std::string>> MnistChecksums(std::string_view split);

enum class SplitStrategy { kRandom, kByLabel };

std::string_view SplitStrategyName(SplitStrategy strategy);
SplitStrategy ParseSplitStrategy(std::string_view name);

// Per-image source id in [0, M); -1 marks images outside every source.
struct SourceSplit {
  int num_sources = 0;
  std::vector<int> assignment;
  SplitStrategy strategy = SplitStrategy::kRandom;
  std::uint64_t seed = 0;

  // Dataset indices of source m, ascending.
  std::vector<int> Indices(int source) const;
  std::vector<int> Sizes() const;
  // Keeps the first `per_source` images (in dataset order) of every source.
  SourceSplit Limited(int per_source) const;

  bool operator==(const SourceSplit&) const = default;
};

// Seeded permutation cut into M contiguous parts whose sizes differ by at
// most one.
SourceSplit SplitRandom(const Dataset& dataset, int num_sources, std::uint64_t seed);
// Source m holds exactly the images labelled m; labels >= M are excluded.
SourceSplit SplitByLabel(const Dataset& dataset, int num_sources);

// CSV rows: index,label,source_id,strategy,seed
void WriteSplitCsv(const SourceSplit& split, const Dataset& dataset,
                   const std::filesystem::path& path);
SourceSplit ReadSplitCsv(const std::filesystem::path& path);

// Entry (i, j) is the Pearson correlation between the flattened mean images
// of sources i and j. Symmetric, with an exact unit diagonal.
std::vector<std::vector<double>> PearsonMatrix(const SourceSplit& split, const Dataset& dataset);

}  // namespace drasic

#endif  // DRASIC_DATA_H_
