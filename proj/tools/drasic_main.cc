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

// drasic: split, train, encode, decode, eval and report.
//
// Exit codes: 0 success, 2 usage, 3 data or file format, 4 numeric failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "drasic/bitstream.h"
#include "drasic/config_file.h"
#include "drasic/evaluation.h"
#include "drasic/runtime.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace drasic {
namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr char kCodeVersion[] = "1.0.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string NowUtc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path ResolveOut(const std::string& out, const std::string& command) {
  if (!out.empty()) return out;
  const char* root = std::getenv("DRASIC_OUTPUT_ROOT");
  return fs::path(root != nullptr && *root != '\0' ? root : "runs") / command;
}

json DatasetInfo(std::string_view split) {
  json sums = json::object();
  for (const auto& [file, sha] : MnistChecksums(split)) sums[file] = sha;
  return {{"name", "mnist"}, {"split", split}, {"dir", DefaultDataDir().string()}, {"sha256", sums}};
}

// Run record shared by every command; appended to <dir>/manifest.json.
struct Manifest {
  json entry;

  Manifest(std::string command, const std::vector<std::string>& argv) {
    entry = {{"command", std::move(command)}, {"argv", argv}, {"code_version", kCodeVersion},
             {"started_utc", NowUtc()}};
  }

  void Append(const fs::path& dir) {
    entry["finished_utc"] = NowUtc();
    const fs::path path = dir / "manifest.json";
    json doc = {{"runs", json::array()}};
    if (fs::exists(path)) {
      std::ifstream in(path);
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw FormatError(path.string() + " is not a valid manifest: " + e.what());
      }
      if (!doc.contains("runs") || !doc["runs"].is_array()) throw FormatError(path.string() + " has no runs array");
    }
    doc["runs"].push_back(entry);
    std::ofstream out(path);
    out << doc.dump(2) << '\n';
    if (!out) throw DataError("cannot write " + path.string());
  }
};

json ConfigJson(const TrainConfig& c) {
  json j = json::object();
  std::istringstream lines(FormatTrainConfig(c));
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

void WritePgm(const Tensor<float>& pixels, int orig_h, int orig_w, const fs::path& path) {
  const int h = pixels.dim(2), w = pixels.dim(3);
  const int top = (h - orig_h) / 2, left = (w - orig_w) / 2;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << orig_w << ' ' << orig_h << "\n255\n";
  for (int y = 0; y < orig_h; ++y) {
    for (int x = 0; x < orig_w; ++x) {
      const float v = std::clamp(pixels.at(0, 0, y + top, x + left), 0.0f, 1.0f);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
    }
  }
}

// ---- split -------------------------------------------------------------

struct SplitArgs {
  std::string data_split = "train";
  std::string strategy;
  int m = 0;
  std::uint64_t seed = 0;
  std::string out;
};

void RunSplit(const SplitArgs& a, const std::vector<std::string>& argv) {
  const SplitStrategy strategy = ParseSplitStrategy(a.strategy);
  const fs::path dir = ResolveOut(a.out, "split");
  Manifest manifest("split", argv);
  const Dataset data = LoadDataset("mnist", a.data_split);
  const SourceSplit split =
      strategy == SplitStrategy::kRandom ? SplitRandom(data, a.m, a.seed) : SplitByLabel(data, a.m);
  fs::create_directories(dir);
  WriteSplitCsv(split, data, dir / "split.csv");
  const auto r = PearsonMatrix(split, data);
  std::ofstream pearson(dir / "pearson.csv");
  pearson << std::setprecision(17);
  for (const auto& row : r) {
    for (std::size_t j = 0; j < row.size(); ++j) pearson << (j ? "," : "") << row[j];
    pearson << '\n';
  }
  const auto sizes = split.Sizes();
  std::cout << "split " << a.strategy << " M=" << a.m << " sizes:";
  for (int s : sizes) std::cout << ' ' << s;
  std::cout << "\nwrote " << (dir / "split.csv").string() << '\n';
  manifest.entry["config"] = {{"strategy", a.strategy}, {"M", a.m}, {"data_split", a.data_split}};
  manifest.entry["seed"] = a.seed;
  manifest.entry["dataset"] = DatasetInfo(a.data_split);
  manifest.entry["outputs"] = {(dir / "split.csv").string(), (dir / "pearson.csv").string()};
  manifest.Append(dir);
}

// ---- train -------------------------------------------------------------

struct TrainArgs {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string split_file;
  int epochs = -1;
  int limit = -1;
  long long seed = -1;
  bool print_config = false;
  bool quiet = false;
  std::string out;
};

TrainConfig ResolveTrainConfig(const TrainArgs& a) {
  TrainConfig config = a.config_file.empty() ? TrainConfig{} : LoadTrainConfig(a.config_file);
  for (const std::string& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    ApplyConfigValue(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.epochs >= 0) config.epochs = a.epochs;
  if (a.limit >= 0) config.limit_per_source = a.limit;
  if (a.seed >= 0) config.seed = static_cast<std::uint64_t>(a.seed);
  config.Validate();
  return config;
}

void RunTrain(const TrainArgs& a, const std::vector<std::string>& argv) {
  const TrainConfig config = ResolveTrainConfig(a);
  if (a.print_config) {
    std::cout << FormatTrainConfig(config);
    return;
  }
  if (config.regime != Regime::kJoint && a.split_file.empty()) {
    throw UsageError(std::string(RegimeName(config.regime)) + " training needs --split (see `drasic split`)");
  }
  const Dataset data = LoadDataset("mnist", "train");
  SourceSplit split;
  if (a.split_file.empty()) {
    split = SourceSplit{1, std::vector<int>(data.labels.size(), 0), SplitStrategy::kRandom, config.seed};
  } else {
    split = ReadSplitCsv(a.split_file);
    if (split.assignment.size() != data.labels.size()) {
      throw DataError(a.split_file + " covers " + std::to_string(split.assignment.size()) +
                      " images; the training set has " + std::to_string(data.labels.size()));
    }
  }
  const fs::path dir = ResolveOut(a.out, "train");
  fs::create_directories(dir);
  Manifest manifest("train", argv);
  int last_epoch = -1;
  const auto start = std::chrono::steady_clock::now();
  const TrainedSystem system = Train(data, split, config, [&](const LossRecord& r) {
    if (a.quiet || r.epoch == last_epoch) return;
    last_epoch = r.epoch;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "epoch " << r.epoch << " lr " << r.lr << " first-step loss " << r.loss << " (" << secs << " s)\n";
  });
  SaveCheckpoint(system, dir / "checkpoint.bin");
  WriteLossCsv(system.history, dir / "loss.csv");
  std::ofstream(dir / "config.txt") << FormatTrainConfig(config);
  if (!a.quiet) {
    std::cerr << "final epoch loss " << system.epoch_losses.back() << "\n";
  }
  std::cout << "wrote " << (dir / "checkpoint.bin").string() << '\n';
  manifest.entry["config"] = ConfigJson(config);
  manifest.entry["seed"] = config.seed;
  manifest.entry["split_file"] = a.split_file;
  manifest.entry["dataset"] = DatasetInfo("train");
  manifest.entry["outputs"] = {(dir / "checkpoint.bin").string(), (dir / "loss.csv").string(),
                               (dir / "config.txt").string()};
  manifest.Append(dir);
}

// ---- eval --------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string strategy = "by_label";
  long long seed = -1;
  int limit = 0;
  int t = 0;
  std::string denominator = "padded";
  std::vector<int> active;
  std::string out;
};

void RunEval(const EvalArgs& a, const std::vector<std::string>& argv) {
  const TrainedSystem system = LoadCheckpoint(a.checkpoint);
  const Dataset test = LoadDataset("mnist", "test");
  const int m = system.config.num_sources;
  const std::uint64_t seed = a.seed >= 0 ? static_cast<std::uint64_t>(a.seed) : system.config.seed;
  SourceSplit split = ParseSplitStrategy(a.strategy) == SplitStrategy::kRandom ? SplitRandom(test, m, seed)
                                                                                : SplitByLabel(test, m);
  if (a.limit > 0) split = split.Limited(a.limit);
  EvalOptions options;
  options.iterations = a.t;
  if (a.denominator == "original") {
    options.bpp_denominator = BppDenominator::kOriginal;
  } else if (a.denominator != "padded") {
    throw UsageError("--bpp-denominator must be padded or original");
  }
  const fs::path dir = ResolveOut(a.out, "eval");
  fs::create_directories(dir);
  Manifest manifest("eval", argv);
  const RDCurveSet curves = a.active.empty() ? RdEval(system, test, split, options)
                                             : RobustnessEval(system, test, split, a.active, options);
  WriteRdCsv(curves, dir / "rd.csv");
  const PlotSeries series[] = {{std::string(RegimeName(system.config.regime)), curves}};
  WriteRdPlotSvg(series, "PSNR vs bpp (" + std::string(RegimeName(system.config.regime)) + ", M=" +
                             std::to_string(m) + ")", dir / "rd.svg");
  const ConfidenceBand band = ComputeConfidenceBand(curves);
  std::cout << std::fixed << std::setprecision(3);
  for (std::size_t t = 0; t < band.mean.size(); ++t) {
    std::cout << "t=" << t + 1 << " mean PSNR " << band.mean[t] << " dB";
    if (band.has_band()) std::cout << " (sd " << band.sd[t] << ")";
    std::cout << '\n';
  }
  manifest.entry["config"] = {{"checkpoint", a.checkpoint}, {"strategy", a.strategy}, {"limit", a.limit},
                              {"T", options.iterations}, {"bpp_denominator", a.denominator},
                              {"active", a.active}, {"train_config", ConfigJson(system.config)}};
  manifest.entry["seed"] = seed;
  manifest.entry["dataset"] = DatasetInfo("test");
  manifest.entry["outputs"] = {(dir / "rd.csv").string(), (dir / "rd.svg").string()};
  manifest.Append(dir);
}

// ---- encode / decode ---------------------------------------------------

struct EncodeArgs {
  std::string checkpoint;
  std::string data_split = "test";
  std::vector<int> indices;
  int source = 0;
  int t = 0;
  std::string out;
};

void RunEncode(const EncodeArgs& a, const std::vector<std::string>& argv) {
  const TrainedSystem system = LoadCheckpoint(a.checkpoint);
  const Dataset data = LoadDataset("mnist", a.data_split);
  if (a.indices.empty()) throw UsageError("encode needs at least one --index");
  const int iterations = a.t > 0 ? a.t : system.config.iterations;
  const CodecConfig& codec = system.config.codec;
  const fs::path dir = ResolveOut(a.out, "encode");
  fs::create_directories(dir);
  Manifest manifest("encode", argv);
  StreamHeader header;
  header.orig_height = data.images.dim(2);
  header.orig_width = data.images.dim(3);
  header.padded_height = codec.height;
  header.padded_width = codec.width;
  header.channels = codec.image_channels;
  header.code_channels = codec.code_channels;
  header.source_id = a.source;
  header.model_hash = system.DecoderHash(a.source);
  std::vector<std::string> outputs;
  for (int index : a.indices) {
    const int one[] = {index};
    const Tensor<float> padded = PadToCanvas(GatherBatch(data.images, one), codec.height, codec.width);
    const auto trace = Compress(padded, iterations, system.EncoderFor(a.source), system.DecoderFor(a.source),
                                BinarizeMode::kDeterministic);
    const fs::path path = dir / ("image_" + std::to_string(index) + ".drsc");
    WriteStream(Pack(trace.codes, header), path);
    outputs.push_back(path.string());
  }
  std::cout << "wrote " << outputs.size() << " stream(s) to " << dir.string() << " at "
            << Bpp(StreamHeader{header.version, header.orig_height, header.orig_width, header.padded_height,
                                header.padded_width, header.channels, header.code_channels, iterations,
                                header.source_id, header.model_hash},
                   iterations)
            << " bpp\n";
  manifest.entry["config"] = {{"checkpoint", a.checkpoint}, {"indices", a.indices}, {"source", a.source},
                              {"T", iterations}, {"data_split", a.data_split}};
  manifest.entry["seed"] = system.config.seed;
  manifest.entry["dataset"] = DatasetInfo(a.data_split);
  manifest.entry["outputs"] = outputs;
  manifest.Append(dir);
}

struct DecodeArgs {
  std::string checkpoint;
  std::string stream;
  int t = 0;
  std::string out;
  int compare_index = -1;
  std::string data_split = "test";
};

void RunDecode(const DecodeArgs& a, const std::vector<std::string>& argv) {
  const TrainedSystem system = LoadCheckpoint(a.checkpoint);
  ScalableStream stream = ReadStream(a.stream);
  const StreamHeader& h = stream.header;
  if (h.source_id >= system.config.num_sources) {
    throw DataError("stream source " + std::to_string(h.source_id) + " is not part of this system");
  }
  if (system.DecoderHash(h.source_id) != h.model_hash) {
    throw DataError("stream was produced by a different model (hash mismatch); refusing to decode");
  }
  if (a.t > 0) stream = Truncate(stream, a.t);
  const Tensor<float> recon = ReconstructPrefix<float>(Unpack(stream), system.DecoderFor(h.source_id));
  const Tensor<float> pixels = ReconstructionToPixels(recon);
  const fs::path out = a.out.empty() ? ResolveOut("", "decode") / "decoded.pgm" : fs::path(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  WritePgm(pixels, h.orig_height, h.orig_width, out);
  Manifest manifest("decode", argv);
  std::cout << "decoded " << stream.header.iterations << " iteration(s), "
            << Bpp(stream.header, stream.header.iterations)
            << " bpp -> " << out.string() << '\n';
  if (a.compare_index >= 0) {
    const Dataset data = LoadDataset("mnist", a.data_split);
    const int one[] = {a.compare_index};
    const Tensor<float> ref = PadToCanvas(GatherBatch(data.images, one), h.padded_height, h.padded_width);
    std::cout << std::setprecision(17) << "PSNR " << Psnr(ref, pixels) << " dB\n";
    manifest.entry["dataset"] = DatasetInfo(a.data_split);
  }
  manifest.entry["config"] = {{"checkpoint", a.checkpoint}, {"stream", a.stream}, {"T", stream.header.iterations}};
  manifest.entry["seed"] = system.config.seed;
  manifest.entry["outputs"] = {out.string()};
  manifest.Append(out.has_parent_path() ? out.parent_path() : fs::path("."));
}

// ---- report ------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> results;
  std::string out;
};

void RunReport(const ReportArgs& a, const std::vector<std::string>& argv) {
  std::map<std::pair<std::string, int>, std::vector<PlotSeries>> groups;
  for (const std::string& d : a.results) {
    const fs::path csv = fs::path(d) / "rd.csv";
    if (!fs::exists(csv)) throw DataError("no rd.csv in " + d + " (run `drasic eval` first)");
    RDCurveSet curves = ReadRdCsv(csv);
    if (curves.points.empty()) throw DataError(csv.string() + " holds no results");
    const RDPoint& p = curves.points.front();
    auto& group = groups[{std::string(SplitStrategyName(p.strategy)), p.num_sources}];
    std::string label(RegimeName(p.regime));
    for (const auto& s : group) {
      if (s.label == label) label += " (" + fs::path(d).filename().string() + ")";
    }
    group.push_back({std::move(label), std::move(curves)});
  }
  if (groups.empty()) throw DataError("report needs at least one results directory");
  const fs::path dir = ResolveOut(a.out, "report");
  fs::create_directories(dir);
  Manifest manifest("report", argv);
  std::ofstream summary(dir / "summary.csv");
  std::ofstream md(dir / "summary.md");
  summary << "strategy,M,regime,t,mean_psnr_db,band_sd_db,pooled_psnr_db\n" << std::setprecision(17);
  md << "| strategy | M | regime | t | mean PSNR (dB) | band sd (dB) |\n|---|---|---|---|---|---|\n"
     << std::fixed << std::setprecision(3);
  std::vector<std::string> outputs = {(dir / "summary.csv").string(), (dir / "summary.md").string()};
  for (const auto& [key, series] : groups) {
    std::map<std::string, double> final_mean;
    for (const auto& s : series) {
      const ConfidenceBand band = ComputeConfidenceBand(s.curves);
      const int t = static_cast<int>(band.mean.size());
      const double pooled = s.curves.Curve(-1).empty() ? band.mean.back() : s.curves.Curve(-1).back().psnr_db;
      const double sd = band.has_band() ? band.sd.back() : 0.0;
      summary << key.first << ',' << key.second << ',' << s.label << ',' << t << ',' << band.mean.back() << ','
              << sd << ',' << pooled << '\n';
      md << "| " << key.first << " | " << key.second << " | " << s.label << " | " << t << " | " << band.mean.back()
         << " | " << sd << " |\n";
      final_mean[s.label] = band.mean.back();
    }
    if (final_mean.count("joint") && final_mean.count("distributed")) {
      md << "\nJoint - Distributed gap at final t (" << key.first << ", M=" << key.second
         << "): " << final_mean["joint"] - final_mean["distributed"] << " dB\n\n";
    }
    const fs::path svg = dir / ("rd_" + key.first + "_M" + std::to_string(key.second) + ".svg");
    WriteRdPlotSvg(series, "PSNR vs bpp (" + key.first + ", M=" + std::to_string(key.second) + ")", svg);
    outputs.push_back(svg.string());
  }
  std::cout << "wrote report to " << dir.string() << '\n';
  manifest.entry["config"] = {{"results", a.results}};
  manifest.entry["outputs"] = outputs;
  manifest.Append(dir);
}

}  // namespace
}  // namespace drasic

int main(int argc, char** argv) {
  using namespace drasic;
  TuneAllocator();
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Distributed recurrent image compression on MNIST"};
  app.require_subcommand(1);

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Partition a dataset split into M sources");
  split_cmd->add_option("--strategy", split.strategy, "random or by_label")
      ->required()
      ->check(CLI::IsMember({"random", "by_label"}));
  split_cmd->add_option("--m", split.m, "number of sources")->required();
  split_cmd->add_option("--seed", split.seed, "seed for random splits");
  split_cmd->add_option("--data-split", split.data_split, "train or test");
  split_cmd->add_option("--out", split.out, "output directory");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a joint, distributed or separate system");
  train_cmd->add_option("--config", train.config_file, "key = value config file");
  train_cmd->add_option("--set", train.overrides, "override a config key (key=value), repeatable");
  train_cmd->add_option("--split", train.split_file, "split CSV from `drasic split`");
  train_cmd->add_option("--epochs", train.epochs, "override epochs");
  train_cmd->add_option("--limit", train.limit, "use at most N images per source");
  train_cmd->add_option("--seed", train.seed, "override seed");
  train_cmd->add_flag("--print-config", train.print_config, "print the resolved config and exit");
  train_cmd->add_flag("--quiet", train.quiet, "no progress output");
  train_cmd->add_option("--out", train.out, "output directory");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Rate-distortion evaluation on the test set");
  eval_cmd->add_option("--checkpoint", eval.checkpoint)->required();
  eval_cmd->add_option("--strategy", eval.strategy, "test split strategy (random or by_label)")
      ->check(CLI::IsMember({"random", "by_label"}));
  eval_cmd->add_option("--seed", eval.seed, "seed for a random test split");
  eval_cmd->add_option("--limit", eval.limit, "at most N test images per source");
  eval_cmd->add_option("--t", eval.t, "iterations to evaluate");
  eval_cmd->add_option("--bpp-denominator", eval.denominator, "padded or original");
  eval_cmd->add_option("--active", eval.active, "evaluate only these sources (distributed robustness)")
      ->delimiter(',');
  eval_cmd->add_option("--out", eval.out, "output directory");

  EncodeArgs encode;
  auto* encode_cmd = app.add_subcommand("encode", "Compress dataset images into scalable streams");
  encode_cmd->add_option("--checkpoint", encode.checkpoint)->required();
  encode_cmd->add_option("--index", encode.indices, "dataset image index, repeatable")->delimiter(',');
  encode_cmd->add_option("--source", encode.source, "source id whose encoder is used");
  encode_cmd->add_option("--t", encode.t, "iterations to store");
  encode_cmd->add_option("--data-split", encode.data_split, "train or test");
  encode_cmd->add_option("--out", encode.out, "output directory");

  DecodeArgs decode;
  auto* decode_cmd = app.add_subcommand("decode", "Reconstruct an image from a stream prefix");
  decode_cmd->add_option("--checkpoint", decode.checkpoint)->required();
  decode_cmd->add_option("--stream", decode.stream)->required();
  decode_cmd->add_option("--t", decode.t, "decode only the first t iterations");
  decode_cmd->add_option("--out", decode.out, "output PGM path");
  decode_cmd->add_option("--compare-index", decode.compare_index, "print PSNR against this dataset image");
  decode_cmd->add_option("--data-split", decode.data_split, "dataset split for --compare-index");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Overlay RD curves and summarize regimes");
  report_cmd->add_option("results", report.results, "eval output directories")->required();
  report_cmd->add_option("--out", report.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*split_cmd) RunSplit(split, args);
    if (*train_cmd) RunTrain(train, args);
    if (*eval_cmd) RunEval(eval, args);
    if (*encode_cmd) RunEncode(encode, args);
    if (*decode_cmd) RunDecode(decode, args);
    if (*report_cmd) RunReport(report, args);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitData;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
