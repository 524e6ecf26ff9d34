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

// Joint, distributed and separate training of recurrent residual codecs.

#ifndef DRASIC_TRAINING_H_
#define DRASIC_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "drasic/codec.h"
#include "drasic/data.h"

namespace drasic {

// Joint: one encoder and one decoder on the pooled sources.
// Distributed: one encoder per source, one shared decoder.
// Separate: one independent encoder/decoder pair per source.
enum class Regime { kJoint, kDistributed, kSeparate };
enum class LossKind { kMse, kL1 };

std::string_view RegimeName(Regime regime);
Regime ParseRegime(std::string_view name);
std::string_view LossKindName(LossKind kind);
LossKind ParseLossKind(std::string_view name);

struct TrainConfig {
  Regime regime = Regime::kJoint;
  int num_sources = 1;
  int iterations = 16;
  int batch_size = 100;
  int epochs = 200;
  double base_lr = 0.001;
  double decay_factor = 0.5;
  int decay_every = 50;
  std::uint64_t seed = 0;
  LossKind loss_kind = LossKind::kMse;
  int limit_per_source = 0;  // 0 keeps every image
  CodecConfig codec;

  // Throws std::invalid_argument naming the offending field.
  void Validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// base_lr * decay_factor ^ floor(epoch / decay_every)
double LrAt(int epoch, const TrainConfig& config);

// (1/T) sum_t L(x_1, sum_{i<=t} x~_i)
template <typename T>
Var<T> IterationLoss(const Var<T>& original, std::span<const Var<T>> partial_recons, LossKind kind);
template <typename T>
Var<T> IterationLoss(const SourceRollout<T>& rollout, LossKind kind);
// Mean of the per-source iteration losses.
template <typename T>
Var<T> DistributedLoss(std::span<const SourceRollout<T>> rollouts, LossKind kind);

// Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
class Adam {
 public:
  explicit Adam(std::vector<NamedParameter<float>> params);
  // Applies one update from the accumulated gradients, then clears them.
  void Step(double lr);
  int steps() const { return step_; }

 private:
  std::vector<NamedParameter<float>> params_;
  std::vector<std::vector<float>> m_, v_;
  int step_ = 0;
};

struct LossRecord {
  int epoch = 0;
  int step = 0;  // global step, 0-based
  Regime regime = Regime::kJoint;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainedSystem {
  TrainConfig config;
  std::vector<EncoderParams<float>> encoders;  // 1 (joint) or M
  std::vector<DecoderParams<float>> decoders;  // M for separate, else 1
  std::vector<LossRecord> history;
  std::vector<double> epoch_losses;  // mean step loss per epoch

  int num_sources() const { return config.regime == Regime::kJoint ? 1 : config.num_sources; }
  // Codec used for images of `source`; joint maps every source to its pair.
  const EncoderParams<float>& EncoderFor(int source) const;
  const DecoderParams<float>& DecoderFor(int source) const;
  // Identifies the decoder a stream must be decoded with.
  std::uint64_t DecoderHash(int source) const;
  std::vector<NamedParameter<float>> AllParameters();
};

// Randomly initialized system for `config`.
TrainedSystem InitSystem(const TrainConfig& config);

using StepCallback = std::function<void(const LossRecord&)>;

// Trains on the images assigned by `split` (after limit_per_source). Joint
// pools every assigned image; the other regimes require split.num_sources ==
// config.num_sources. Throws NumericError with epoch/step diagnostics on a
// non-finite loss.
TrainedSystem Train(const Dataset& dataset, const SourceSplit& split, const TrainConfig& config,
                    const StepCallback& on_step = {});

// Centred, lattice-snapped network input for native images in [0, 1].
Tensor<float> PrepareInput(const Tensor<float>& images, const CodecConfig& codec);

// CSV columns: epoch,step,regime,loss,lr
void WriteLossCsv(std::span<const LossRecord> history, const std::filesystem::path& path);

// Little-endian binary checkpoint holding the config and every parameter.
void SaveCheckpoint(const TrainedSystem& system, const std::filesystem::path& path);
// Rejects bad magic, unknown versions, truncation, trailing bytes and, when
// `expected` is given, a different regime. Nothing is returned on failure.
TrainedSystem LoadCheckpoint(const std::filesystem::path& path,
                             std::optional<Regime> expected = std::nullopt);

}  // namespace drasic

#endif  // DRASIC_TRAINING_H_
