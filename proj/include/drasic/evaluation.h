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

// Rate-distortion evaluation, confidence bands, result files and plots.

#ifndef DRASIC_EVALUATION_H_
#define DRASIC_EVALUATION_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drasic/bitstream.h"
#include "drasic/training.h"

namespace drasic {

inline constexpr double kPsnrCapDb = 100.0;

// Per-image 10 log10(1 / MSE) after clipping both inputs to [0, 1]; a zero
// MSE yields kPsnrCapDb.
std::vector<double> PsnrPerImage(const Tensor<float>& reference, const Tensor<float>& reconstruction);
// Mean of PsnrPerImage.
double Psnr(const Tensor<float>& reference, const Tensor<float>& reconstruction);

struct RDPoint {
  Regime regime = Regime::kJoint;
  int num_sources = 1;
  SplitStrategy strategy = SplitStrategy::kByLabel;
  std::uint64_t seed = 0;
  int source_id = -1;  // -1: every evaluated image pooled
  int t = 1;
  double bpp = 0.0;
  double psnr_db = 0.0;
  std::string psnr_domain = "padded_canvas";
  BppDenominator bpp_denominator = BppDenominator::kPadded;

  bool operator==(const RDPoint&) const = default;
};

struct RDCurveSet {
  std::vector<RDPoint> points;

  // Source ids present, ascending (-1 first when a pooled curve exists).
  std::vector<int> Sources() const;
  // Points of one source ordered by t.
  std::vector<RDPoint> Curve(int source_id) const;
  // Mean over per-source curves (pooled curve excluded) at iteration t.
  double MeanPsnrAt(int t) const;
  bool operator==(const RDCurveSet&) const = default;
};

// Per-image PSNR for each iteration: psnr[t - 1][image].
using PsnrTable = std::vector<std::vector<double>>;

struct SourceEvaluation {
  int source_id = 0;
  PsnrTable psnr;
};

struct EvalOptions {
  int iterations = 0;  // 0: the system's T
  int chunk = 100;     // images per forward pass and source
  BppDenominator bpp_denominator = BppDenominator::kPadded;
};

// Deterministic compression of the listed sources of `test`. In the
// distributed regime the codes of all listed sources go through the shared
// decoder together, chunk by chunk, as in training.
std::vector<SourceEvaluation> EvaluateSources(const TrainedSystem& system, const Dataset& test,
                                              const SourceSplit& test_split, std::span<const int> sources,
                                              const EvalOptions& options = {});

// One curve per source plus the pooled curve. The split must have the
// system's source count.
RDCurveSet RdEval(const TrainedSystem& system, const Dataset& test, const SourceSplit& test_split,
                  const EvalOptions& options = {});
// Distributed systems only: evaluates only `active` sources, with no codes
// from the others.
RDCurveSet RobustnessEval(const TrainedSystem& system, const Dataset& test, const SourceSplit& test_split,
                          std::span<const int> active, const EvalOptions& options = {});

struct ConfidenceBand {
  std::vector<double> mean;  // per t
  std::vector<double> sd;    // sample sd per t; empty with a single source
  bool has_band() const { return !sd.empty(); }
};
// Across the per-source curves of `curves` (pooled curve excluded).
ConfidenceBand ComputeConfidenceBand(const RDCurveSet& curves);

// CSV columns: regime,M,strategy,seed,source_id,t,bpp,psnr_db,psnr_domain,bpp_denominator
void WriteRdCsv(const RDCurveSet& curves, const std::filesystem::path& path);
RDCurveSet ReadRdCsv(const std::filesystem::path& path);

struct PlotSeries {
  std::string label;
  RDCurveSet curves;
};
// PSNR vs bpp: the mean over sources of each series with a +-1 sd band.
void WriteRdPlotSvg(std::span<const PlotSeries> series, const std::string& title,
                    const std::filesystem::path& path);

}  // namespace drasic

#endif  // DRASIC_EVALUATION_H_
