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

// Shared helpers for the unit tests.

#ifndef DRASIC_TESTS_TEST_UTIL_H_
#define DRASIC_TESTS_TEST_UTIL_H_

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

#include "drasic/data.h"
#include "drasic/training.h"

namespace drasic::testing {

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("drasic_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// A codec small enough for millisecond-scale tests.
inline CodecConfig TinyCodec(int iterations = 4) {
  CodecConfig c;
  c.iterations = iterations;
  c.stem_channels = 4;
  c.encoder_rnn = {4, 4};
  c.decoder_head = 4;
  c.decoder_rnn = {4, 4, 4};
  return c;
}

inline TrainConfig TinyTrainConfig(Regime regime, int num_sources, int iterations = 4) {
  TrainConfig c;
  c.regime = regime;
  c.num_sources = num_sources;
  c.iterations = iterations;
  c.codec = TinyCodec(iterations);
  c.batch_size = 20;
  c.epochs = 1;
  c.seed = 11;
  return c;
}

template <typename T>
Tensor<T> RandomTensor(const Shape& shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor<T> t(shape);
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

// Synthetic digits-like dataset: image n has label n % 10 and a label
// dependent bright square plus noise, values in [0, 1].
inline Dataset SyntheticDataset(int n, std::uint64_t seed = 3) {
  Dataset d;
  d.name = "synthetic";
  d.split = "train";
  d.images = Tensor<float>({n, 1, 28, 28});
  d.labels.resize(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> noise(0.0f, 0.2f);
  for (int i = 0; i < n; ++i) {
    const int label = i % 10;
    d.labels[i] = label;
    for (int y = 0; y < 28; ++y) {
      for (int x = 0; x < 28; ++x) {
        const bool on = y >= 2 * label && y < 2 * label + 8 && x >= 4 + label && x < 12 + label;
        d.images.at(i, 0, y, x) = on ? 0.8f + noise(rng) : noise(rng);
      }
    }
  }
  return d;
}

// True when the MNIST files are present in the configured data directory.
inline bool MnistAvailable() {
  const auto dir = DefaultDataDir();
  return std::filesystem::exists(dir / "train-images.idx3-ubyte") ||
         std::filesystem::exists(dir / "train-images-idx3-ubyte") ||
         std::filesystem::exists(dir / "train-images.idx3-ubyte.gz") ||
         std::filesystem::exists(dir / "train-images-idx3-ubyte.gz");
}

#define DRASIC_REQUIRE_MNIST()                                                     \
  do {                                                                             \
    if (!::drasic::testing::MnistAvailable()) GTEST_SKIP() << "MNIST not present"; \
  } while (0)

}  // namespace drasic::testing

#endif  // DRASIC_TESTS_TEST_UTIL_H_
