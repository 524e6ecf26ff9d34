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

#include "drasic/training.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "drasic/ops.h"

namespace drasic {
namespace {

[[noreturn]] void Invalid(const std::string& what) { throw std::invalid_argument("train config: " + what); }

// One shuffled pass over `indices` cut into batches.
std::vector<std::vector<int>> ShuffledBatches(std::vector<int> indices, int batch, std::mt19937_64& rng) {
  std::shuffle(indices.begin(), indices.end(), rng);
  std::vector<std::vector<int>> out;
  for (std::size_t begin = 0; begin < indices.size(); begin += static_cast<std::size_t>(batch)) {
    const std::size_t end = std::min(indices.size(), begin + static_cast<std::size_t>(batch));
    out.emplace_back(indices.begin() + static_cast<std::ptrdiff_t>(begin),
                     indices.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::vector<int> SampleWithReplacement(const std::vector<int>& indices, int count, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, indices.size() - 1);
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int& v : out) v = indices[pick(rng)];
  return out;
}

void CheckFinite(double loss, int epoch, int step, std::string_view what) {
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite loss (" + std::to_string(loss) + ") at epoch " + std::to_string(epoch) +
                       ", step " + std::to_string(step) + " (" + std::string(what) +
                       "); lower base_lr or check the input data");
  }
}

}  // namespace

std::string_view RegimeName(Regime regime) {
  switch (regime) {
    case Regime::kJoint: return "joint";
    case Regime::kDistributed: return "distributed";
    case Regime::kSeparate: return "separate";
  }
  return "?";
}

Regime ParseRegime(std::string_view name) {
  if (name == "joint") return Regime::kJoint;
  if (name == "distributed") return Regime::kDistributed;
  if (name == "separate") return Regime::kSeparate;
  throw std::invalid_argument("unknown regime '" + std::string(name) +
                              "' (expected joint, distributed or separate)");
}

std::string_view LossKindName(LossKind kind) { return kind == LossKind::kMse ? "mse" : "l1"; }

LossKind ParseLossKind(std::string_view name) {
  if (name == "mse") return LossKind::kMse;
  if (name == "l1") return LossKind::kL1;
  throw std::invalid_argument("unknown loss_kind '" + std::string(name) + "' (expected mse or l1)");
}

void TrainConfig::Validate() const {
  if (num_sources < 1) Invalid("M must be >= 1");
  if (iterations < 1 || iterations > CodecConfig::kMaxIterations) {
    Invalid("T must be in [1, " + std::to_string(CodecConfig::kMaxIterations) + "]");
  }
  if (codec.iterations != iterations) Invalid("codec iterations differ from T");
  if (batch_size < 1) Invalid("batch_size must be >= 1");
  if (epochs < 1) Invalid("epochs must be >= 1");
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) Invalid("base_lr must be positive");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) Invalid("decay_factor must be in (0, 1]");
  if (decay_every < 1) Invalid("decay_every must be >= 1");
  if (limit_per_source < 0) Invalid("limit must be >= 0");
  codec.Validate();
}

double LrAt(int epoch, const TrainConfig& config) {
  if (epoch < 0 || epoch >= config.epochs) {
    throw std::invalid_argument("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                                std::to_string(config.epochs) + ")");
  }
  return config.base_lr * std::pow(config.decay_factor, epoch / config.decay_every);
}

template <typename T>
Var<T> IterationLoss(const Var<T>& original, std::span<const Var<T>> partial_recons, LossKind kind) {
  if (partial_recons.empty()) throw std::invalid_argument("iteration_loss: empty trace");
  std::vector<Var<T>> terms;
  terms.reserve(partial_recons.size());
  for (const Var<T>& r : partial_recons) {
    if (r.shape() != original.shape()) {
      throw ShapeError("iteration_loss: reconstruction " + ShapeString(r.shape()) +
                       " does not match input batch " + ShapeString(original.shape()));
    }
    terms.push_back(kind == LossKind::kMse ? MeanSquaredError(original, r) : MeanAbsoluteError(original, r));
  }
  return MeanOf<T>(terms);
}

template <typename T>
Var<T> IterationLoss(const SourceRollout<T>& rollout, LossKind kind) {
  if (rollout.residuals.empty()) throw std::invalid_argument("iteration_loss: rollout has no input");
  return IterationLoss<T>(rollout.residuals.front(), rollout.reconstructions, kind);
}

template <typename T>
Var<T> DistributedLoss(std::span<const SourceRollout<T>> rollouts, LossKind kind) {
  if (rollouts.empty()) throw std::invalid_argument("distributed_loss: no source batches");
  std::vector<Var<T>> per_source;
  for (const auto& r : rollouts) per_source.push_back(IterationLoss(r, kind));
  return MeanOf<T>(per_source);
}

Adam::Adam(std::vector<NamedParameter<float>> params) : params_(std::move(params)) {
  for (const auto& p : params_) {
    m_.emplace_back(p.var->value().size(), 0.0f);
    v_.emplace_back(p.var->value().size(), 0.0f);
  }
}

void Adam::Step(double lr) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++step_;
  const double c1 = 1.0 - std::pow(kBeta1, step_);
  const double c2 = 1.0 - std::pow(kBeta2, step_);
  const auto step_size = static_cast<float>(lr / c1);
  const auto inv_sqrt_c2 = static_cast<float>(1.0 / std::sqrt(c2));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Var<float>& var = *params_[k].var;
    if (!var.has_grad()) continue;
    const Tensor<float>& g = var.grad();
    Tensor<float>& w = var.mutable_value();
    float* m = m_[k].data();
    float* v = v_[k].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = static_cast<float>(kBeta1) * m[i] + static_cast<float>(1.0 - kBeta1) * g[i];
      v[i] = static_cast<float>(kBeta2) * v[i] + static_cast<float>(1.0 - kBeta2) * g[i] * g[i];
      w[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + static_cast<float>(kEps));
    }
    var.ZeroGrad();
  }
}

const EncoderParams<float>& TrainedSystem::EncoderFor(int source) const {
  if (source < 0 || source >= config.num_sources) throw std::out_of_range("source id out of range");
  return encoders.size() == 1 ? encoders[0] : encoders[static_cast<std::size_t>(source)];
}

const DecoderParams<float>& TrainedSystem::DecoderFor(int source) const {
  if (source < 0 || source >= config.num_sources) throw std::out_of_range("source id out of range");
  return decoders.size() == 1 ? decoders[0] : decoders[static_cast<std::size_t>(source)];
}

std::uint64_t TrainedSystem::DecoderHash(int source) const {
  auto& decoder = const_cast<DecoderParams<float>&>(DecoderFor(source));
  const auto params = decoder.Parameters();
  return ParameterHash<float>(decoder.architecture_hash, params);
}

std::vector<NamedParameter<float>> TrainedSystem::AllParameters() {
  std::vector<NamedParameter<float>> out;
  auto append = [&out](std::vector<NamedParameter<float>> params, const std::string& prefix) {
    for (auto& p : params) out.push_back({prefix + p.name, p.var});
  };
  for (std::size_t m = 0; m < encoders.size(); ++m) {
    append(encoders[m].Parameters(), "source" + std::to_string(m) + ".");
  }
  for (std::size_t m = 0; m < decoders.size(); ++m) {
    append(decoders[m].Parameters(), decoders.size() == 1 ? "shared." : "source" + std::to_string(m) + ".");
  }
  return out;
}

TrainedSystem InitSystem(const TrainConfig& config) {
  config.Validate();
  TrainedSystem system;
  system.config = config;
  std::mt19937_64 rng(config.seed);
  const int pairs = config.regime == Regime::kJoint ? 1 : config.num_sources;
  if (config.regime == Regime::kSeparate) {
    for (int m = 0; m < pairs; ++m) {
      system.encoders.push_back(InitEncoder<float>(config.codec, rng));
      system.decoders.push_back(InitDecoder<float>(config.codec, rng));
    }
  } else {
    for (int m = 0; m < pairs; ++m) system.encoders.push_back(InitEncoder<float>(config.codec, rng));
    system.decoders.push_back(InitDecoder<float>(config.codec, rng));
  }
  return system;
}

Tensor<float> PrepareInput(const Tensor<float>& images, const CodecConfig& codec) {
  return SnapToLattice(CenterPixels(PadToCanvas(images, codec.height, codec.width)));
}

TrainedSystem Train(const Dataset& dataset, const SourceSplit& split, const TrainConfig& config,
                    const StepCallback& on_step) {
  config.Validate();
  if (split.assignment.size() != dataset.labels.size()) {
    throw DataError("split covers " + std::to_string(split.assignment.size()) + " images, dataset has " +
                    std::to_string(dataset.labels.size()));
  }
  if (config.regime != Regime::kJoint && split.num_sources != config.num_sources) {
    throw DataError("split has " + std::to_string(split.num_sources) + " sources, config M = " +
                    std::to_string(config.num_sources));
  }
  const SourceSplit used = config.limit_per_source > 0 ? split.Limited(config.limit_per_source) : split;
  std::vector<std::vector<int>> sources;
  if (config.regime == Regime::kJoint) {
    std::vector<int> pooled;
    for (std::size_t i = 0; i < used.assignment.size(); ++i) {
      if (used.assignment[i] >= 0) pooled.push_back(static_cast<int>(i));
    }
    sources.push_back(std::move(pooled));
  } else {
    for (int m = 0; m < used.num_sources; ++m) sources.push_back(used.Indices(m));
  }
  for (std::size_t m = 0; m < sources.size(); ++m) {
    if (sources[m].empty()) throw DataError("source " + std::to_string(m) + " has no training images");
  }

  TrainedSystem system = InitSystem(config);
  // Independent streams for shuffling and stochastic binarization.
  std::mt19937_64 data_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 binarize_rng(config.seed ^ 0xd1b54a32d192ed03ULL);
  const BinarizeMode mode = BinarizeMode::kStochastic;
  auto input_for = [&](std::span<const int> idx) {
    return PrepareInput(GatherBatch(dataset.images, idx), config.codec);
  };

  std::vector<Adam> optimizers;
  if (config.regime == Regime::kSeparate) {
    for (std::size_t m = 0; m < sources.size(); ++m) {
      auto params = system.encoders[m].Parameters();
      for (auto& p : system.decoders[m].Parameters()) params.push_back(p);
      optimizers.emplace_back(std::move(params));
    }
  } else {
    optimizers.emplace_back(system.AllParameters());
  }

  int global_step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = LrAt(epoch, config);
    double epoch_sum = 0.0;
    int epoch_steps = 0;
    auto record = [&](double loss) {
      CheckFinite(loss, epoch, global_step, RegimeName(config.regime));
      LossRecord rec{epoch, global_step, config.regime, loss, lr};
      system.history.push_back(rec);
      if (on_step) on_step(rec);
      epoch_sum += loss;
      ++epoch_steps;
      ++global_step;
    };

    // Non-finite activations surface as binarizer domain errors before any
    // loss exists; report them like a non-finite loss.
    try {
      if (config.regime == Regime::kJoint) {
        for (const auto& batch : ShuffledBatches(sources[0], config.batch_size, data_rng)) {
          const Tensor<float> x = input_for(batch);
          const EncoderParams<float>* enc[] = {&system.encoders[0]};
          auto rollout = RolloutSharedDecoder<float>(std::span<const Tensor<float>>(&x, 1), enc,
                                                     system.decoders[0], config.iterations, mode, &binarize_rng);
          Var<float> loss = IterationLoss(rollout[0], config.loss_kind);
          const double value = loss.value()[0];
          CheckFinite(value, epoch, global_step, "joint");
          Backward(loss);
          optimizers[0].Step(lr);
          record(value);
        }
      } else if (config.regime == Regime::kDistributed) {
        std::size_t largest = 0;
        for (const auto& s : sources) largest = std::max(largest, s.size());
        const std::size_t steps = (largest + config.batch_size - 1) / static_cast<std::size_t>(config.batch_size);
        for (std::size_t s = 0; s < steps; ++s) {
          std::vector<Tensor<float>> inputs;
          std::vector<const EncoderParams<float>*> enc;
          for (std::size_t m = 0; m < sources.size(); ++m) {
            inputs.push_back(input_for(SampleWithReplacement(sources[m], config.batch_size, data_rng)));
            enc.push_back(&system.encoders[m]);
          }
          auto rollouts = RolloutSharedDecoder<float>(inputs, enc, system.decoders[0], config.iterations, mode,
                                                      &binarize_rng);
          Var<float> loss = DistributedLoss<float>(rollouts, config.loss_kind);
          const double value = loss.value()[0];
          CheckFinite(value, epoch, global_step, "distributed");
          Backward(loss);
          optimizers[0].Step(lr);
          record(value);
        }
      } else {
        // Pairs advance in lockstep; each logged step averages the pairs that
        // still have a batch left in this epoch.
        std::vector<std::vector<std::vector<int>>> plans;
        std::size_t steps = 0;
        for (const auto& s : sources) {
          plans.push_back(ShuffledBatches(s, config.batch_size, data_rng));
          steps = std::max(steps, plans.back().size());
        }
        for (std::size_t s = 0; s < steps; ++s) {
          double sum = 0.0;
          int active = 0;
          for (std::size_t m = 0; m < sources.size(); ++m) {
            if (s >= plans[m].size()) continue;
            const Tensor<float> x = input_for(plans[m][s]);
            const EncoderParams<float>* enc[] = {&system.encoders[m]};
            auto rollout = RolloutSharedDecoder<float>(std::span<const Tensor<float>>(&x, 1), enc,
                                                       system.decoders[m], config.iterations, mode,
                                                       &binarize_rng);
            Var<float> loss = IterationLoss(rollout[0], config.loss_kind);
            const double value = loss.value()[0];
            CheckFinite(value, epoch, global_step, "separate pair " + std::to_string(m));
            Backward(loss);
            optimizers[m].Step(lr);
            sum += value;
            ++active;
          }
          record(sum / active);
        }
      }
    } catch (const std::domain_error& e) {
      throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", step " +
                         std::to_string(global_step));
    }
    system.epoch_losses.push_back(epoch_sum / std::max(epoch_steps, 1));
  }
  return system;
}

void WriteLossCsv(std::span<const LossRecord> history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,step,regime,loss,lr\n" << std::setprecision(17);
  for (const auto& r : history) {
    out << r.epoch << ',' << r.step << ',' << RegimeName(r.regime) << ',' << r.loss << ',' << r.lr << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

#define DRASIC_INSTANTIATE_TRAINING(T)                                                          \
  template Var<T> IterationLoss(const Var<T>&, std::span<const Var<T>>, LossKind);             \
  template Var<T> IterationLoss(const SourceRollout<T>&, LossKind);                            \
  template Var<T> DistributedLoss(std::span<const SourceRollout<T>>, LossKind);

DRASIC_INSTANTIATE_TRAINING(float)
DRASIC_INSTANTIATE_TRAINING(double)

#undef DRASIC_INSTANTIATE_TRAINING

}  // namespace drasic
