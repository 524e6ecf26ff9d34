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

// Acceptance suite. Prints one PASS/FAIL line per criterion and writes the
// raw measurements to <out>/acceptance.json. Criteria 4 to 8 share one
// desk-scale training run of all three regimes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "drasic/bitstream.h"
#include "drasic/evaluation.h"
#include "drasic/grad_check.h"
#include "drasic/runtime.h"

namespace drasic {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fixed(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string Sci(double v) {
  std::ostringstream s;
  s.setf(std::ios::scientific);
  s.precision(2);
  s << v;
  return s.str();
}

Tensor<double> Uniform(const Shape& shape, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor<double> t(shape);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

Var<double> Param(const Shape& shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  return Var<double>::Parameter(Uniform(shape, seed, lo, hi));
}

// ---- 1: gradients --------------------------------------------------------

constexpr int kGradPoints = 10;
constexpr double kGradTolerance = 1e-4;

Outcome CheckGradients(json& log) {
  std::map<std::string, double> worst;
  auto record = [&](const std::string& op, const GradCheckReport& r) {
    const double e = r.all_finite ? r.max_relative_error : INFINITY;
    worst[op] = std::max(worst[op], e);
  };
  for (int point = 0; point < kGradPoints; ++point) {
    const std::uint64_t s = 1000 + 100 * point;

    auto x = Param({3, 4}, s + 1, -2.0, 2.0);
    const Tensor<double> px = Uniform({3, 4}, s + 2, -1.0, 1.0);
    std::vector<NamedParameter<double>> tp = {{"x", &x}};
    record("tanh", GradCheck([&] { return WeightedSum(Tanh(x), px); }, tp, 1e-5));

    const ConvSpec spec{2, 3, 3, 1 + point % 2, 1};
    auto ci = Param({2, 2, 6, 6}, s + 3);
    auto cw = Param(spec.WeightShape(), s + 4);
    auto cb = Param({3}, s + 5);
    const Tensor<double> pc = Uniform(spec.OutputShape(ci.shape()), s + 6, -1.0, 1.0);
    std::vector<NamedParameter<double>> cp = {{"x", &ci}, {"w", &cw}, {"b", &cb}};
    record("conv2d", GradCheck([&] { return WeightedSum(Conv2d(ci, cw, cb, spec), pc); }, cp, 1e-5));

    std::mt19937_64 rng(s + 7);
    ConvLstmLayer<double> layer = MakeConvLstmLayer<double>(3, 2, 3, 2, 3, rng);
    layer.input.bias.mutable_value() = Uniform({8}, s + 8, -0.5, 0.5);
    auto lx = Param({2, 3, 6, 6}, s + 9);
    auto lh = Param({2, 2, 3, 3}, s + 10);
    auto lc = Param({2, 2, 3, 3}, s + 11);
    const Tensor<double> ph = Uniform({2, 2, 3, 3}, s + 12, -1.0, 1.0);
    const Tensor<double> pl = Uniform({2, 2, 3, 3}, s + 13, -1.0, 1.0);
    std::vector<NamedParameter<double>> lp = {{"x", &lx}, {"h", &lh}, {"c", &lc}};
    layer.AppendParameters("cell", lp);
    record("convlstm_cell", GradCheck(
                                [&] {
                                  const ConvLstmState<double> next = ConvLstmCell(lx, {lh, lc}, layer);
                                  return WeightedSum(next.hidden, ph) + WeightedSum(next.cell, pl);
                                },
                                lp, 1e-5));

    CodecConfig config;
    config.height = config.width = 16;
    config.iterations = 1;
    config.stem_channels = 4;
    config.encoder_rnn = {4, 4};
    config.decoder_head = 4;
    config.decoder_rnn = {4, 4, 4};
    std::mt19937_64 init(s + 14);
    EncoderParams<double> enc = InitEncoder<double>(config, init);
    DecoderParams<double> dec = InitDecoder<double>(config, init);
    const Tensor<double> input = SnapToLattice(CenterPixels(Uniform({2, 1, 16, 16}, s + 15, 0.0, 1.0)));
    const Tensor<double> proj = Uniform(input.shape(), s + 16, -1.0, 1.0);
    std::vector<NamedParameter<double>> params = enc.Parameters();
    for (auto& p : dec.Parameters()) params.push_back(p);
    QuantizerTape<double> tape;
    std::mt19937_64 bin_rng(s + 17);
    const EncoderParams<double>* encs[] = {&enc};
    auto rollout = [&] {
      return RolloutSharedDecoder<double>(std::span(&input, 1), encs, dec, 1, BinarizeMode::kStochastic,
                                          &bin_rng, &tape);
    };
    tape.StartRecording();
    rollout();
    // Gradients of this graph span ~1e-8 to O(1); Richardson extrapolation
    // lets one step clear rounding noise without curvature error.
    record("encoder_binarizer_decoder",
           GradCheck(
               [&] {
                 tape.StartReplay();
                 return WeightedSum(rollout()[0].reconstructions[0], proj);
               },
               params, 1e-3, FiniteDifference::kRichardson));
  }
  Outcome o{true, ""};
  for (const auto& [op, e] : worst) {
    o.pass = o.pass && e < kGradTolerance;
    o.detail += (o.detail.empty() ? "" : ", ") + op + " " + Sci(e);
    log["max_relative_error"][op] = e;
  }
  o.detail = "max rel err over " + std::to_string(kGradPoints) + " points: " + o.detail;
  return o;
}

// ---- 2: binarizer statistics --------------------------------------------

Outcome CheckBinarizer(json& log) {
  constexpr int kDraws = 100000;
  std::mt19937_64 rng(2);
  const CodeTensor b = Binarize(Tensor<float>({kDraws}, 0.5f), BinarizeMode::kStochastic, &rng);
  double sum = 0.0;
  std::set<int> support;
  for (auto v : b.values()) {
    sum += v;
    support.insert(v);
  }
  const double mean = sum / kDraws;
  const bool support_ok = support == std::set<int>{-1, 1};
  log["mean"] = mean;
  log["support_is_pm1"] = support_ok;
  return {mean >= 0.49 && mean <= 0.51 && support_ok,
          "z=0.5, 1e5 draws: mean " + Fixed(mean, 4) + ", support {-1,+1} " + (support_ok ? "yes" : "no")};
}

// ---- 3: structural invariants -------------------------------------------

Outcome CheckStructure(json& log) {
  const CodecConfig config;  // default architecture, T = 16
  const int T = config.iterations;
  std::mt19937_64 rng(3);
  const EncoderParams<float> enc = InitEncoder<float>(config, rng);
  const DecoderParams<float> dec = InitDecoder<float>(config, rng);
  Tensor<float> images({3, 1, 32, 32});
  std::uniform_real_distribution<float> pix(0.0f, 1.0f);
  for (auto& v : images.values()) v = pix(rng);
  const auto trace = Compress(images, T, enc, dec, BinarizeMode::kDeterministic);

  const Tensor<float> x1 = SnapToLattice(CenterPixels(images));
  bool telescoping = trace.residuals[0].BitwiseEqual(x1);
  for (int t = 1; t <= T && telescoping; ++t) {
    const Tensor<float>& next = t < T ? trace.residuals[t] : trace.final_residual;
    for (std::size_t i = 0; i < x1.size(); ++i) {
      if (trace.partial_recons[t - 1][i] + next[i] != x1[i]) {
        telescoping = false;
        break;
      }
    }
  }

  bool replay = true;
  for (int t = 1; t <= T; ++t) {
    replay = replay && ReconstructPrefix<float>(std::span(trace.codes).first(t), dec)
                           .BitwiseEqual(trace.partial_recons[t - 1]);
  }

  bool streams = true;
  for (int n = 0; n < images.dim(0); ++n) {
    std::vector<CodeTensor> codes;
    for (const auto& c : trace.codes) codes.push_back(c.SliceBatch(n, 1));
    StreamHeader header;
    header.iterations = T;
    const ScalableStream full = Pack(codes, header);
    streams = streams && Unpack(full) == codes && ParseStream(SerializeStream(full)) == full;
    for (int t = 1; t <= T; ++t) {
      const std::vector<CodeTensor> prefix(codes.begin(), codes.begin() + t);
      streams = streams && Unpack(Truncate(full, t)) == prefix;
    }
  }

  bool bpp = true;
  StreamHeader header;
  header.iterations = T;
  for (int t = 1; t <= T; ++t) bpp = bpp && Bpp(header, t) == 0.03125 * t;

  log["telescoping_T16"] = telescoping;
  log["prefix_replay"] = replay;
  log["pack_truncate_unpack"] = streams;
  log["bpp_0.03125t"] = bpp;
  auto yn = [](bool b) { return b ? "ok" : "MISMATCH"; };
  return {telescoping && replay && streams && bpp,
          std::string("telescoping T=16 ") + yn(telescoping) + ", prefix replay " + yn(replay) +
              ", pack/truncate/unpack " + yn(streams) + ", bpp(t)=0.03125t " + yn(bpp)};
}

// ---- 4 to 8: desk-scale regime comparison --------------------------------

constexpr int kDeskSources = 4;
constexpr int kDeskIterations = 8;

TrainConfig DeskConfig(Regime regime) {
  TrainConfig c;
  c.regime = regime;
  c.num_sources = kDeskSources;
  c.iterations = kDeskIterations;
  c.epochs = 20;
  c.limit_per_source = 2000;
  c.seed = 1;
  c.codec.iterations = kDeskIterations;
  c.codec.stem_channels = 8;
  c.codec.encoder_rnn = {16, 16};
  c.codec.decoder_head = 16;
  c.codec.decoder_rnn = {16, 16, 16};
  return c;
}

struct DeskRun {
  std::map<Regime, TrainedSystem> systems;
  std::map<Regime, RDCurveSet> curves;
  Dataset test;
  SourceSplit test_split;
};

TrainedSystem TrainOrReuse(const Dataset& train, const SourceSplit& split, Regime regime, const fs::path& out,
                           bool reuse) {
  const TrainConfig config = DeskConfig(regime);
  const fs::path ckpt = out / ("checkpoint_" + std::string(RegimeName(regime)) + ".bin");
  if (reuse && fs::exists(ckpt)) {
    TrainedSystem loaded = LoadCheckpoint(ckpt, regime);
    if (loaded.config == config) {
      std::cerr << "[acceptance] reusing " << ckpt.string() << '\n';
      return loaded;
    }
    std::cerr << "[acceptance] " << ckpt.string() << " has a different config; retraining\n";
  }
  const auto start = std::chrono::steady_clock::now();
  int last_epoch = -1;
  TrainedSystem system = Train(train, split, config, [&](const LossRecord& r) {
    if (r.epoch == last_epoch) return;
    last_epoch = r.epoch;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "[acceptance] " << RegimeName(regime) << " epoch " << r.epoch + 1 << "/" << config.epochs
              << " (" << Fixed(secs, 0) << " s)\n";
  });
  SaveCheckpoint(system, ckpt);
  WriteLossCsv(system.history, out / ("loss_" + std::string(RegimeName(regime)) + ".csv"));
  return system;
}

DeskRun RunDesk(const fs::path& out, bool reuse) {
  DeskRun run;
  const Dataset train = LoadDataset("mnist", "train");
  const SourceSplit split = SplitByLabel(train, kDeskSources);
  run.test = LoadDataset("mnist", "test");
  run.test_split = SplitByLabel(run.test, kDeskSources);
  for (Regime r : {Regime::kJoint, Regime::kDistributed, Regime::kSeparate}) {
    run.systems.emplace(r, TrainOrReuse(train, split, r, out, reuse));
    run.curves.emplace(r, RdEval(run.systems.at(r), run.test, run.test_split));
    WriteRdCsv(run.curves.at(r), out / ("rd_" + std::string(RegimeName(r)) + ".csv"));
  }
  return run;
}

double FinalMean(const DeskRun& run, Regime r) { return run.curves.at(r).MeanPsnrAt(kDeskIterations); }

Outcome CheckOrdering(const DeskRun& run, json& log) {
  const double j = FinalMean(run, Regime::kJoint);
  const double d = FinalMean(run, Regime::kDistributed);
  const double s = FinalMean(run, Regime::kSeparate);
  for (Regime r : {Regime::kJoint, Regime::kDistributed, Regime::kSeparate}) {
    std::vector<double> per_t;
    for (int t = 1; t <= kDeskIterations; ++t) per_t.push_back(run.curves.at(r).MeanPsnrAt(t));
    log["mean_psnr_db_by_t"][std::string(RegimeName(r))] = per_t;
  }
  log["final_mean_psnr_db"] = {{"joint", j}, {"distributed", d}, {"separate", s}};
  log["distributed_minus_separate_db"] = d - s;
  return {j >= d && d >= s && d - s >= 0.5,
          "final-t mean PSNR: joint " + Fixed(j) + ", distributed " + Fixed(d) + ", separate " + Fixed(s) +
              " dB; distributed - separate " + Fixed(d - s) + " dB (need >= 0.5)"};
}

Outcome CheckGap(const DeskRun& run, json& log) {
  const double gap = FinalMean(run, Regime::kJoint) - FinalMean(run, Regime::kDistributed);
  log["joint_minus_distributed_db"] = gap;
  return {gap <= 3.0, "joint - distributed at t=" + std::to_string(kDeskIterations) + ": " + Fixed(gap) +
                          " dB (need <= 3)"};
}

Outcome CheckMonotone(const DeskRun& run, json& log) {
  constexpr int kHeldOut = 500;
  const SourceSplit held_out = run.test_split.Limited(kHeldOut / kDeskSources);
  std::vector<int> sources(kDeskSources);
  for (int m = 0; m < kDeskSources; ++m) sources[m] = m;
  const auto evals = EvaluateSources(run.systems.at(Regime::kDistributed), run.test, held_out, sources);
  int images = 0, monotone = 0;
  for (const auto& e : evals) {
    for (std::size_t i = 0; i < e.psnr.front().size(); ++i) {
      bool ok = true;
      for (std::size_t t = 1; t < e.psnr.size(); ++t) ok = ok && e.psnr[t][i] >= e.psnr[t - 1][i];
      monotone += ok;
      ++images;
    }
  }
  const double fraction = images > 0 ? static_cast<double>(monotone) / images : 0.0;
  log["images"] = images;
  log["monotone"] = monotone;
  log["fraction"] = fraction;
  return {images == kHeldOut && fraction >= 0.95,
          "distributed PSNR(t) nondecreasing for " + std::to_string(monotone) + "/" + std::to_string(images) +
              " held-out images (" + Fixed(100.0 * fraction, 1) + "%, need >= 95%)"};
}

Outcome CheckRobustness(const DeskRun& run, json& log) {
  const TrainedSystem& system = run.systems.at(Regime::kDistributed);
  const RDCurveSet& full = run.curves.at(Regime::kDistributed);
  bool all = true;
  for (int m = 0; m < kDeskSources; ++m) {
    const int active[] = {m};
    const RDCurveSet alone = RobustnessEval(system, run.test, run.test_split, active);
    const bool same = alone.Curve(m) == full.Curve(m);
    log["source_" + std::to_string(m) + "_bit_identical"] = same;
    all = all && same;
  }
  return {all, std::string("single-active-source curves vs full evaluation, ") + std::to_string(kDeskSources) +
                   " sources: " + (all ? "bit-identical" : "DIFFER")};
}

Outcome CheckBands(const DeskRun& run, json& log) {
  std::map<Regime, double> sd;
  for (Regime r : {Regime::kJoint, Regime::kDistributed, Regime::kSeparate}) {
    sd[r] = ComputeConfidenceBand(run.curves.at(r)).sd.back();
    log["final_sd_db"][std::string(RegimeName(r))] = sd[r];
  }
  return {sd[Regime::kDistributed] < sd[Regime::kSeparate],
          "across-source sd at t=" + std::to_string(kDeskIterations) + ": distributed " +
              Fixed(sd[Regime::kDistributed]) + " dB vs separate " + Fixed(sd[Regime::kSeparate]) +
              " dB (joint " + Fixed(sd[Regime::kJoint]) + " dB)"};
}

// ---- 9: correlation analysis ---------------------------------------------

Outcome CheckPearson(json& log) {
  const Dataset train = LoadDataset("mnist", "train");
  const auto label = PearsonMatrix(SplitByLabel(train, 10), train);
  const auto random = PearsonMatrix(SplitRandom(train, 10, 9), train);
  bool symmetric = true, unit_diagonal = true, open_interval = true;
  auto off_diagonal_variance = [](const std::vector<std::vector<double>>& m) {
    std::vector<double> v;
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < m.size(); ++j) {
        if (i != j) v.push_back(m[i][j]);
      }
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return var / static_cast<double>(v.size());
  };
  for (std::size_t i = 0; i < label.size(); ++i) {
    unit_diagonal = unit_diagonal && std::abs(label[i][i] - 1.0) < 1e-12;
    for (std::size_t j = 0; j < label.size(); ++j) {
      symmetric = symmetric && label[i][j] == label[j][i];
      if (i != j) open_interval = open_interval && label[i][j] > 0.0 && label[i][j] < 1.0;
    }
  }
  const double var_label = off_diagonal_variance(label);
  const double var_random = off_diagonal_variance(random);
  log["label_split"] = label;
  log["random_split"] = random;
  log["off_diagonal_variance"] = {{"label", var_label}, {"random", var_random}};
  return {symmetric && unit_diagonal && open_interval && var_random < var_label,
          std::string("by-label M=10: symmetric ") + (symmetric ? "yes" : "no") + ", unit diagonal " +
              (unit_diagonal ? "yes" : "no") + ", off-diagonals in (0,1) " + (open_interval ? "yes" : "no") +
              "; off-diagonal variance random " + Sci(var_random) + " < label " + Sci(var_label)};
}

int Run(int argc, char** argv) {
  CLI::App app{"Acceptance suite: one PASS/FAIL line per criterion"};
  std::string out = "acceptance";
  std::vector<int> only;
  bool reuse = false;
  app.add_option("--out", out, "Directory for checkpoints, RD curves and acceptance.json");
  app.add_option("--criteria", only, "Run only these criteria (default: 1-9)")->delimiter(',');
  app.add_flag("--reuse-checkpoints", reuse,
               "Load desk-run checkpoints from --out when their config matches instead of retraining");
  CLI11_PARSE(app, argc, argv);
  TuneAllocator();
  fs::create_directories(out);

  auto selected = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };
  std::optional<DeskRun> desk;
  auto need_desk = [&]() -> const DeskRun& {
    if (!desk) desk = RunDesk(out, reuse);
    return *desk;
  };

  const std::vector<std::pair<std::string, std::function<Outcome(json&)>>> criteria = {
      {"gradient correctness", CheckGradients},
      {"binarizer statistics", CheckBinarizer},
      {"structural invariants", CheckStructure},
      {"regime ordering", [&](json& l) { return CheckOrdering(need_desk(), l); }},
      {"joint-distributed gap", [&](json& l) { return CheckGap(need_desk(), l); }},
      {"monotone quality", [&](json& l) { return CheckMonotone(need_desk(), l); }},
      {"robustness", [&](json& l) { return CheckRobustness(need_desk(), l); }},
      {"band width", [&](json& l) { return CheckBands(need_desk(), l); }},
      {"correlation analysis", CheckPearson},
  };

  json report;
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int n = static_cast<int>(k) + 1;
    if (!selected(n)) continue;
    const auto start = std::chrono::steady_clock::now();
    json log;
    Outcome o;
    try {
      o = criteria[k].second(log);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    log["pass"] = o.pass;
    log["seconds"] = secs;
    report[std::to_string(n)] = log;
    std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << " [" << criteria[k].first
              << "] " << o.detail << " (" << Fixed(secs, 1) << " s)" << std::endl;
  }
  std::ofstream(fs::path(out) / "acceptance.json") << report.dump(2) << '\n';
  std::cout << (failures == 0 ? "all selected criteria passed" : std::to_string(failures) + " criterion(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace drasic

int main(int argc, char** argv) { return drasic::Run(argc, argv); }
