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

#include "drasic/evaluation.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace drasic {
namespace {

std::string_view DenominatorName(BppDenominator d) { return d == BppDenominator::kPadded ? "padded" : "original"; }

BppDenominator ParseDenominator(std::string_view s) {
  if (s == "padded") return BppDenominator::kPadded;
  if (s == "original") return BppDenominator::kOriginal;
  throw FormatError("unknown bpp_denominator '" + std::string(s) + "'");
}

struct Prepared {
  Tensor<float> padded;  // [0, 1]
  Tensor<float> input;   // centred, snapped
};

Prepared PrepareChunk(const Dataset& test, std::span<const int> indices, const CodecConfig& codec) {
  Prepared p;
  p.padded = PadToCanvas(GatherBatch(test.images, indices), codec.height, codec.width);
  p.input = SnapToLattice(CenterPixels(p.padded));
  return p;
}

void AppendPsnr(const Tensor<float>& reference, const SourceRollout<float>& rollout, PsnrTable& table) {
  for (std::size_t t = 0; t < table.size(); ++t) {
    const auto values = PsnrPerImage(reference, ReconstructionToPixels(rollout.reconstructions[t].value()));
    table[t].insert(table[t].end(), values.begin(), values.end());
  }
}

RDCurveSet BuildCurves(const TrainedSystem& system, const Dataset& test, const SourceSplit& split,
                       const std::vector<SourceEvaluation>& evals, const EvalOptions& options) {
  const CodecConfig& codec = system.config.codec;
  StreamHeader header;
  header.orig_height = test.images.dim(2);
  header.orig_width = test.images.dim(3);
  header.padded_height = codec.height;
  header.padded_width = codec.width;
  header.channels = codec.image_channels;
  header.code_channels = codec.code_channels;
  const int iterations = static_cast<int>(evals.front().psnr.size());
  header.iterations = iterations;

  RDPoint base;
  base.regime = system.config.regime;
  base.num_sources = system.config.num_sources;
  base.strategy = split.strategy;
  base.seed = system.config.seed;
  base.bpp_denominator = options.bpp_denominator;

  RDCurveSet out;
  for (int t = 1; t <= iterations; ++t) {
    RDPoint p = base;
    p.t = t;
    p.bpp = Bpp(header, t, options.bpp_denominator);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& e : evals) {
      for (double v : e.psnr[static_cast<std::size_t>(t - 1)]) sum += v;
      count += e.psnr[static_cast<std::size_t>(t - 1)].size();
    }
    p.source_id = -1;
    p.psnr_db = sum / static_cast<double>(count);
    out.points.push_back(p);
  }
  for (const auto& e : evals) {
    for (int t = 1; t <= iterations; ++t) {
      RDPoint p = base;
      p.t = t;
      p.bpp = Bpp(header, t, options.bpp_denominator);
      p.source_id = e.source_id;
      const auto& row = e.psnr[static_cast<std::size_t>(t - 1)];
      double sum = 0.0;
      for (double v : row) sum += v;
      p.psnr_db = sum / static_cast<double>(row.size());
      out.points.push_back(p);
    }
  }
  return out;
}

}  // namespace

std::vector<double> PsnrPerImage(const Tensor<float>& reference, const Tensor<float>& reconstruction) {
  if (reference.shape() != reconstruction.shape()) {
    throw ShapeError("psnr: shape mismatch " + ShapeString(reference.shape()) + " vs " +
                     ShapeString(reconstruction.shape()));
  }
  const int n = BatchSize(reference);
  if (n == 0) throw ShapeError("psnr: empty batch");
  const std::size_t per = reference.size() / static_cast<std::size_t>(n);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < per; ++k) {
      const double a = std::clamp(static_cast<double>(reference[i * per + k]), 0.0, 1.0);
      const double b = std::clamp(static_cast<double>(reconstruction[i * per + k]), 0.0, 1.0);
      sum += (a - b) * (a - b);
    }
    const double mse = sum / static_cast<double>(per);
    out[static_cast<std::size_t>(i)] = mse == 0.0 ? kPsnrCapDb : std::min(kPsnrCapDb, -10.0 * std::log10(mse));
  }
  return out;
}

double Psnr(const Tensor<float>& reference, const Tensor<float>& reconstruction) {
  const auto values = PsnrPerImage(reference, reconstruction);
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<int> RDCurveSet::Sources() const {
  std::set<int> ids;
  for (const auto& p : points) ids.insert(p.source_id);
  return {ids.begin(), ids.end()};
}

std::vector<RDPoint> RDCurveSet::Curve(int source_id) const {
  std::vector<RDPoint> out;
  for (const auto& p : points) {
    if (p.source_id == source_id) out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const RDPoint& a, const RDPoint& b) { return a.t < b.t; });
  return out;
}

double RDCurveSet::MeanPsnrAt(int t) const {
  double sum = 0.0;
  int count = 0;
  for (const auto& p : points) {
    if (p.source_id >= 0 && p.t == t) {
      sum += p.psnr_db;
      ++count;
    }
  }
  if (count == 0) throw std::out_of_range("no per-source points at t = " + std::to_string(t));
  return sum / count;
}

std::vector<SourceEvaluation> EvaluateSources(const TrainedSystem& system, const Dataset& test,
                                              const SourceSplit& test_split, std::span<const int> sources,
                                              const EvalOptions& options) {
  const TrainConfig& config = system.config;
  if (test_split.num_sources != config.num_sources) {
    throw DataError("test split has " + std::to_string(test_split.num_sources) + " sources, the " +
                    std::string(RegimeName(config.regime)) + " system was trained with M = " +
                    std::to_string(config.num_sources));
  }
  if (test_split.assignment.size() != test.labels.size()) throw DataError("test split does not match dataset");
  if (sources.empty()) throw std::invalid_argument("no sources to evaluate");
  if (std::set<int>(sources.begin(), sources.end()).size() != sources.size()) {
    throw std::invalid_argument("source list has duplicates");
  }
  const int iterations = options.iterations > 0 ? options.iterations : config.iterations;
  if (iterations > CodecConfig::kMaxIterations) throw std::invalid_argument("too many iterations");
  if (options.chunk < 1) throw std::invalid_argument("chunk must be >= 1");

  std::vector<std::vector<int>> indices;
  std::vector<SourceEvaluation> out;
  std::size_t chunks = 0;
  for (int m : sources) {
    if (m < 0 || m >= config.num_sources) throw std::out_of_range("source " + std::to_string(m) + " out of range");
    indices.push_back(test_split.Indices(m));
    if (indices.back().empty()) throw DataError("test source " + std::to_string(m) + " is empty");
    chunks = std::max(chunks, (indices.back().size() + options.chunk - 1) / static_cast<std::size_t>(options.chunk));
    out.push_back({m, PsnrTable(static_cast<std::size_t>(iterations))});
  }

  NoGradGuard no_grad;
  auto chunk_of = [&](std::size_t k, std::size_t c) -> std::span<const int> {
    const std::size_t begin = c * static_cast<std::size_t>(options.chunk);
    if (begin >= indices[k].size()) return {};
    const std::size_t count = std::min<std::size_t>(options.chunk, indices[k].size() - begin);
    return std::span<const int>(indices[k]).subspan(begin, count);
  };
  for (std::size_t c = 0; c < chunks; ++c) {
    if (config.regime == Regime::kDistributed) {
      std::vector<std::size_t> present;
      std::vector<Prepared> prepared;
      std::vector<Tensor<float>> inputs;
      std::vector<const EncoderParams<float>*> encoders;
      for (std::size_t k = 0; k < sources.size(); ++k) {
        const auto idx = chunk_of(k, c);
        if (idx.empty()) continue;
        present.push_back(k);
        prepared.push_back(PrepareChunk(test, idx, config.codec));
        inputs.push_back(prepared.back().input);
        encoders.push_back(&system.EncoderFor(sources[k]));
      }
      const auto rollouts = RolloutSharedDecoder<float>(inputs, encoders, system.decoders[0], iterations,
                                                        BinarizeMode::kDeterministic, nullptr);
      for (std::size_t j = 0; j < present.size(); ++j) {
        AppendPsnr(prepared[j].padded, rollouts[j], out[present[j]].psnr);
      }
    } else {
      for (std::size_t k = 0; k < sources.size(); ++k) {
        const auto idx = chunk_of(k, c);
        if (idx.empty()) continue;
        const Prepared p = PrepareChunk(test, idx, config.codec);
        const EncoderParams<float>* enc[] = {&system.EncoderFor(sources[k])};
        const auto rollouts =
            RolloutSharedDecoder<float>(std::span<const Tensor<float>>(&p.input, 1), enc,
                                        system.DecoderFor(sources[k]), iterations, BinarizeMode::kDeterministic,
                                        nullptr);
        AppendPsnr(p.padded, rollouts[0], out[k].psnr);
      }
    }
  }
  return out;
}

RDCurveSet RdEval(const TrainedSystem& system, const Dataset& test, const SourceSplit& test_split,
                  const EvalOptions& options) {
  std::vector<int> all(static_cast<std::size_t>(system.config.num_sources));
  for (int m = 0; m < system.config.num_sources; ++m) all[static_cast<std::size_t>(m)] = m;
  return BuildCurves(system, test, test_split, EvaluateSources(system, test, test_split, all, options), options);
}

RDCurveSet RobustnessEval(const TrainedSystem& system, const Dataset& test, const SourceSplit& test_split,
                          std::span<const int> active, const EvalOptions& options) {
  if (system.config.regime != Regime::kDistributed) {
    throw std::invalid_argument("robustness_eval needs a distributed system");
  }
  if (active.empty()) throw std::invalid_argument("robustness_eval: empty active source set");
  std::vector<int> sorted(active.begin(), active.end());
  std::sort(sorted.begin(), sorted.end());
  return BuildCurves(system, test, test_split, EvaluateSources(system, test, test_split, sorted, options), options);
}

ConfidenceBand ComputeConfidenceBand(const RDCurveSet& curves) {
  std::map<int, std::vector<double>> by_t;
  for (const auto& p : curves.points) {
    if (p.source_id >= 0) by_t[p.t].push_back(p.psnr_db);
  }
  if (by_t.empty()) throw std::invalid_argument("confidence_band: no per-source curves");
  ConfidenceBand band;
  const bool spread = by_t.begin()->second.size() >= 2;
  for (const auto& [t, values] : by_t) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    band.mean.push_back(mean);
    if (spread) {
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      band.sd.push_back(std::sqrt(ss / static_cast<double>(values.size() - 1)));
    }
  }
  return band;
}

void WriteRdCsv(const RDCurveSet& curves, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "regime,M,strategy,seed,source_id,t,bpp,psnr_db,psnr_domain,bpp_denominator\n" << std::setprecision(17);
  for (const auto& p : curves.points) {
    out << RegimeName(p.regime) << ',' << p.num_sources << ',' << SplitStrategyName(p.strategy) << ',' << p.seed
        << ',' << p.source_id << ',' << p.t << ',' << p.bpp << ',' << p.psnr_db << ',' << p.psnr_domain << ','
        << DenominatorName(p.bpp_denominator) << '\n';
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

RDCurveSet ReadRdCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "regime,M,strategy,seed,source_id,t,bpp,psnr_db,psnr_domain,bpp_denominator") {
    throw FormatError(path.string() + ": unexpected header");
  }
  RDCurveSet curves;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) f.push_back(cell);
    if (f.size() != 10) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 10 fields");
    try {
      RDPoint p;
      p.regime = ParseRegime(f[0]);
      p.num_sources = std::stoi(f[1]);
      p.strategy = ParseSplitStrategy(f[2]);
      p.seed = std::stoull(f[3]);
      p.source_id = std::stoi(f[4]);
      p.t = std::stoi(f[5]);
      p.bpp = std::stod(f[6]);
      p.psnr_db = std::stod(f[7]);
      p.psnr_domain = f[8];
      p.bpp_denominator = ParseDenominator(f[9]);
      curves.points.push_back(p);
    } catch (const std::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return curves;
}

void WriteRdPlotSvg(std::span<const PlotSeries> series, const std::string& title,
                    const std::filesystem::path& path) {
  if (series.empty()) throw std::invalid_argument("plot needs at least one series");
  constexpr double kW = 640, kH = 420, kLeft = 60, kRight = 160, kTop = 40, kBottom = 50;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  struct Line {
    std::vector<double> bpp, mean, sd;
  };
  std::vector<Line> lines;
  double x_max = 0.0, y_min = 1e9, y_max = -1e9;
  for (const auto& s : series) {
    const ConfidenceBand band = ComputeConfidenceBand(s.curves);
    Line line;
    line.mean = band.mean;
    line.sd = band.has_band() ? band.sd : std::vector<double>(band.mean.size(), 0.0);
    const int first = s.curves.Sources().back();
    for (const auto& p : s.curves.Curve(first)) line.bpp.push_back(p.bpp);
    for (std::size_t i = 0; i < line.mean.size(); ++i) {
      x_max = std::max(x_max, line.bpp[i]);
      y_min = std::min(y_min, line.mean[i] - line.sd[i]);
      y_max = std::max(y_max, line.mean[i] + line.sd[i]);
    }
    lines.push_back(std::move(line));
  }
  y_min = std::floor(y_min);
  y_max = std::ceil(y_max);
  if (y_max <= y_min) y_max = y_min + 1;
  auto px = [&](double x) { return kLeft + x / x_max * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - (y - y_min) / (y_max - y_min) * (kH - kTop - kBottom); };

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\""
      << kH - kBottom << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = x_max * i / 4.0, y = y_min + (y_max - y_min) * i / 4.0;
    svg << "<text x=\"" << px(x) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\">"
        << std::setprecision(3)
        << x << std::setprecision(2) << "</text>\n"
        << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << y << "</text>\n";
  }
  svg << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">bpp</text>\n"
      << "<text x=\"16\" y=\"" << (kTop + kH - kBottom) / 2 << "\" transform=\"rotate(-90 16 "
      << (kTop + kH - kBottom) / 2 << ")\" text-anchor=\"middle\">PSNR (dB)</text>\n";
  for (std::size_t s = 0; s < lines.size(); ++s) {
    const Line& l = lines[s];
    const char* color = colors[s % std::size(colors)];
    svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < l.mean.size(); ++i) svg << px(l.bpp[i]) << ',' << py(l.mean[i] + l.sd[i]) << ' ';
    for (std::size_t i = l.mean.size(); i-- > 0;) svg << px(l.bpp[i]) << ',' << py(l.mean[i] - l.sd[i]) << ' ';
    svg << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < l.mean.size(); ++i) svg << px(l.bpp[i]) << ',' << py(l.mean[i]) << ' ';
    svg << "\"/>\n";
    const double ly = kTop + 20.0 * static_cast<double>(s);
    svg << "<line x1=\"" << kW - kRight + 12 << "\" y1=\"" << ly << "\" x2=\"" << kW - kRight + 32 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kW - kRight + 38 << "\" y=\"" << ly + 4 << "\">" << series[s].label << "</text>\n";
  }
  svg << "</svg>\n";
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << svg.str();
  if (!out) throw FormatError("failed writing " + path.string());
}

}  // namespace drasic
