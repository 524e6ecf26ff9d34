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

#include "drasic/data.h"

#include <openssl/evp.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace drasic {
namespace {

struct IdxFile {
  std::string_view stem;  // e.g. "train-images"
  std::string_view suffix;  // "idx3-ubyte"
  std::string_view sha256;
};

constexpr IdxFile kMnistFiles[] = {
    {"train-images", "idx3-ubyte", "ba891046e6505d7aadcbbe25680a0738ad16aec93bde7f9b65e87a2fc25776db"},
    {"train-labels", "idx1-ubyte", "65a50cbbf4e906d70832878ad85ccda5333a97f0f4c3dd2ef09a8a9eef7101c5"},
    {"t10k-images", "idx3-ubyte", "0fa7898d509279e482958e8ce81c8e77db3f2f8254e26661ceb7762c4d494ce7"},
    {"t10k-labels", "idx1-ubyte", "ff7bcfd416de33731a308c3f266cc351222c34898ecbeaf847f06e48f7ec33f2"},
};

std::uint32_t ReadBigEndian32(std::span<const unsigned char> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

// gzread passes uncompressed files through unchanged.
std::vector<unsigned char> ReadMaybeGzip(const std::filesystem::path& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw DataError("cannot open " + path.string());
  std::vector<unsigned char> out;
  unsigned char buffer[1 << 16];
  int n = 0;
  while ((n = gzread(file, buffer, sizeof(buffer))) > 0) out.insert(out.end(), buffer, buffer + n);
  const bool failed = n < 0;
  gzclose(file);
  if (failed) throw DataError("corrupt gzip stream in " + path.string());
  return out;
}

std::vector<unsigned char> LoadVerified(const std::filesystem::path& dir, const IdxFile& spec) {
  const std::string dash = std::string(spec.stem) + "-" + std::string(spec.suffix);
  const std::string dot = std::string(spec.stem) + "." + std::string(spec.suffix);
  for (const std::string& base : {dash, dot}) {
    for (const std::string& name : {base, base + ".gz"}) {
      const std::filesystem::path path = dir / name;
      if (!std::filesystem::exists(path)) continue;
      std::vector<unsigned char> bytes = ReadMaybeGzip(path);
      const std::string actual = Sha256Hex(bytes);
      if (actual != spec.sha256) {
        throw DataError(path.string() + " is corrupt: SHA-256 of contents is " + actual +
                        ", expected " + std::string(spec.sha256));
      }
      return bytes;
    }
  }
  throw DataError("MNIST file " + dash + " (or " + dot + ", optionally .gz) not found in " +
                  dir.string() + "; expected SHA-256 " + std::string(spec.sha256) +
                  ". Set DRASIC_DATA_DIR to the directory holding the MNIST IDX files.");
}

void CheckSourceCount(int num_sources, int limit_high, const char* op) {
  if (num_sources < 1 || num_sources > limit_high) {
    throw DataError(std::string(op) + ": source count " + std::to_string(num_sources) +
                    " outside [1, " + std::to_string(limit_high) + "]");
  }
}

}  // namespace

Dataset Dataset::Subset(std::span<const int> indices) const {
  Dataset out;
  out.name = name;
  out.split = split;
  out.images = GatherBatch(images, indices);
  out.labels.reserve(indices.size());
  for (int i : indices) out.labels.push_back(labels.at(static_cast<std::size_t>(i)));
  return out;
}

std::filesystem::path DefaultDataDir() {
  if (const char* env = std::getenv("DRASIC_DATA_DIR"); env != nullptr && *env != '\0') return env;
  const char* home = std::getenv("HOME");
  return std::filesystem::path(home != nullptr ? home : ".") / ".cache" / "drasic" / "mnist";
}

std::string Sha256Hex(std::span<const unsigned char> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw DataError("SHA-256 computation failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

Tensor<float> ParseIdxImages(std::span<const unsigned char> bytes) {
  if (bytes.size() < 16 || ReadBigEndian32(bytes, 0) != 2051) {
    throw DataError("not an IDX image file (magic 2051 expected)");
  }
  const std::uint32_t n = ReadBigEndian32(bytes, 4);
  const std::uint32_t rows = ReadBigEndian32(bytes, 8);
  const std::uint32_t cols = ReadBigEndian32(bytes, 12);
  const std::size_t expected = 16 + static_cast<std::size_t>(n) * rows * cols;
  if (n == 0 || rows == 0 || cols == 0 || bytes.size() != expected) {
    throw DataError("IDX image payload is " + std::to_string(bytes.size()) + " bytes, header implies " +
                    std::to_string(expected));
  }
  Tensor<float> images(Shape{static_cast<int>(n), 1, static_cast<int>(rows), static_cast<int>(cols)});
  for (std::size_t i = 0; i < images.size(); ++i) images[i] = static_cast<float>(bytes[16 + i]) / 255.0f;
  return images;
}

std::vector<int> ParseIdxLabels(std::span<const unsigned char> bytes) {
  if (bytes.size() < 8 || ReadBigEndian32(bytes, 0) != 2049) {
    throw DataError("not an IDX label file (magic 2049 expected)");
  }
  const std::uint32_t n = ReadBigEndian32(bytes, 4);
  if (bytes.size() != 8 + static_cast<std::size_t>(n)) {
    throw DataError("IDX label payload is " + std::to_string(bytes.size()) + " bytes, header implies " +
                    std::to_string(8 + static_cast<std::size_t>(n)));
  }
  return std::vector<int>(bytes.begin() + 8, bytes.end());
}

Dataset LoadDataset(std::string_view name, std::string_view split, const std::filesystem::path& dir) {
  if (name != "mnist") throw DataError("unknown dataset '" + std::string(name) + "' (supported: mnist)");
  if (split != "train" && split != "test") {
    throw DataError("unknown split '" + std::string(split) + "' (expected train or test)");
  }
  const int first = split == "train" ? 0 : 2;
  Dataset out;
  out.name = std::string(name);
  out.split = std::string(split);
  out.images = ParseIdxImages(LoadVerified(dir, kMnistFiles[first]));
  out.labels = ParseIdxLabels(LoadVerified(dir, kMnistFiles[first + 1]));
  if (static_cast<int>(out.labels.size()) != out.images.dim(0)) {
    throw DataError("image count " + std::to_string(out.images.dim(0)) + " differs from label count " +
                    std::to_string(out.labels.size()));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> MnistChecksums(std::string_view split) {
  if (split != "train" && split != "test") throw DataError("unknown split '" + std::string(split) + "'");
  const int first = split == "train" ? 0 : 2;
  std::vector<std::pair<std::string, std::string>> out;
  for (int k = first; k < first + 2; ++k) out.emplace_back(kMnistFiles[k].stem, kMnistFiles[k].sha256);
  return out;
}

std::string_view SplitStrategyName(SplitStrategy strategy) {
  return strategy == SplitStrategy::kRandom ? "random" : "by_label";
}

SplitStrategy ParseSplitStrategy(std::string_view name) {
  if (name == "random") return SplitStrategy::kRandom;
  if (name == "by_label") return SplitStrategy::kByLabel;
  throw DataError("unknown split strategy '" + std::string(name) + "' (expected random or by_label)");
}

std::vector<int> SourceSplit::Indices(int source) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == source) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> SourceSplit::Sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(num_sources), 0);
  for (int a : assignment) {
    if (a >= 0) ++sizes[static_cast<std::size_t>(a)];
  }
  return sizes;
}

SourceSplit SourceSplit::Limited(int per_source) const {
  if (per_source < 1) throw DataError("per-source limit must be >= 1");
  SourceSplit out = *this;
  std::vector<int> kept(static_cast<std::size_t>(num_sources), 0);
  for (int& a : out.assignment) {
    if (a < 0) continue;
    if (kept[static_cast<std::size_t>(a)]++ >= per_source) a = -1;
  }
  return out;
}

SourceSplit SplitRandom(const Dataset& dataset, int num_sources, std::uint64_t seed) {
  CheckSourceCount(num_sources, dataset.size(), "split_random");
  std::vector<int> order(static_cast<std::size_t>(dataset.size()));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  SourceSplit split{num_sources, std::vector<int>(order.size(), -1), SplitStrategy::kRandom, seed};
  const std::size_t n = order.size();
  for (int m = 0; m < num_sources; ++m) {
    const std::size_t begin = n * m / num_sources, end = n * (m + 1) / num_sources;
    for (std::size_t k = begin; k < end; ++k) split.assignment[static_cast<std::size_t>(order[k])] = m;
  }
  return split;
}

SourceSplit SplitByLabel(const Dataset& dataset, int num_sources) {
  CheckSourceCount(num_sources, 10, "split_by_label");
  SourceSplit split{num_sources, std::vector<int>(dataset.labels.size(), -1), SplitStrategy::kByLabel, 0};
  for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
    if (dataset.labels[i] < num_sources) split.assignment[i] = dataset.labels[i];
  }
  return split;
}

void WriteSplitCsv(const SourceSplit& split, const Dataset& dataset, const std::filesystem::path& path) {
  if (split.assignment.size() != dataset.labels.size()) {
    throw DataError("split covers " + std::to_string(split.assignment.size()) + " images, dataset has " +
                    std::to_string(dataset.labels.size()));
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "index,label,source_id,strategy,seed\n";
  const std::string_view strategy = SplitStrategyName(split.strategy);
  for (std::size_t i = 0; i < split.assignment.size(); ++i) {
    out << i << ',' << dataset.labels[i] << ',' << split.assignment[i] << ',' << strategy << ','
        << split.seed << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

SourceSplit ReadSplitCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "index,label,source_id,strategy,seed") {
    throw DataError(path.string() + ": missing header index,label,source_id,strategy,seed");
  }
  SourceSplit split;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string index, label, source, strategy, seed;
    if (!std::getline(row, index, ',') || !std::getline(row, label, ',') ||
        !std::getline(row, source, ',') || !std::getline(row, strategy, ',') ||
        !std::getline(row, seed)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 5 fields");
    }
    try {
      if (std::stoul(index) != split.assignment.size()) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": indices must be consecutive");
      }
      const int id = std::stoi(source);
      split.assignment.push_back(id);
      split.num_sources = std::max(split.num_sources, id + 1);
      split.strategy = ParseSplitStrategy(strategy);
      split.seed = std::stoull(seed);
    } catch (const std::logic_error&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  if (split.assignment.empty()) throw DataError(path.string() + ": no rows");
  return split;
}

std::vector<std::vector<double>> PearsonMatrix(const SourceSplit& split, const Dataset& dataset) {
  const int m_count = split.num_sources;
  if (split.assignment.size() != dataset.labels.size()) throw DataError("split does not match dataset");
  const std::size_t pixels = dataset.images.size() / static_cast<std::size_t>(dataset.size());
  std::vector<std::vector<double>> means(static_cast<std::size_t>(m_count), std::vector<double>(pixels));
  const std::vector<int> sizes = split.Sizes();
  for (std::size_t i = 0; i < split.assignment.size(); ++i) {
    const int a = split.assignment[i];
    if (a < 0) continue;
    const float* img = dataset.images.data() + i * pixels;
    for (std::size_t p = 0; p < pixels; ++p) means[static_cast<std::size_t>(a)][p] += img[p];
  }
  for (int m = 0; m < m_count; ++m) {
    if (sizes[static_cast<std::size_t>(m)] == 0) {
      throw DataError("pearson_matrix: source " + std::to_string(m) + " is empty");
    }
    auto& mean = means[static_cast<std::size_t>(m)];
    const double inv = 1.0 / sizes[static_cast<std::size_t>(m)];
    double centre = 0.0;
    for (double& v : mean) centre += (v *= inv);
    centre /= static_cast<double>(pixels);
    double norm = 0.0;
    for (double& v : mean) {
      v -= centre;
      norm += v * v;
    }
    if (norm == 0.0) {
      throw NumericError("pearson_matrix: mean image of source " + std::to_string(m) +
                         " has zero variance");
    }
    for (double& v : mean) v /= std::sqrt(norm);
  }
  std::vector<std::vector<double>> r(static_cast<std::size_t>(m_count),
                                     std::vector<double>(static_cast<std::size_t>(m_count), 1.0));
  for (int i = 0; i < m_count; ++i) {
    for (int j = i + 1; j < m_count; ++j) {
      const auto& a = means[static_cast<std::size_t>(i)];
      const auto& b = means[static_cast<std::size_t>(j)];
      const double v = std::clamp(std::inner_product(a.begin(), a.end(), b.begin(), 0.0), -1.0, 1.0);
      r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
      r[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = v;
    }
  }
  return r;
}

}  // namespace drasic
