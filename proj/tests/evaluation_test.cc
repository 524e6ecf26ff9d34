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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "drasic/evaluation.h"
#include "test_util.h"

namespace drasic {
namespace {

using testing::SyntheticDataset;
using testing::TinyTrainConfig;

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---- PSNR --------------------------------------------------------------

TEST(PsnrTest, Examples) {
  const Tensor<float> a({1, 1, 10, 10}, 0.5f);
  EXPECT_EQ(Psnr(a, a), kPsnrCapDb);
  Tensor<float> b = a;
  for (auto& v : b.values()) v += 0.1f;  // MSE 0.01 up to float rounding
  EXPECT_NEAR(Psnr(a, b), 20.0, 1e-5);
  Tensor<float> c({1, 1, 10, 10}, 0.0f), d({1, 1, 10, 10}, 0.0f);
  for (int i = 0; i < 10; ++i) d[i] = 0.1f;  // MSE 0.1 * 0.1 * 10 / 100 = 0.001
  EXPECT_NEAR(Psnr(c, d), 30.0, 1e-5);
}

TEST(PsnrTest, AgreesWithDirectMseOracle) {
  const Tensor<float> ref = testing::RandomTensor<float>({6, 1, 32, 32}, 1, 0.0, 1.0);
  const Tensor<float> rec = testing::RandomTensor<float>({6, 1, 32, 32}, 2, -0.2, 1.2);
  const auto got = PsnrPerImage(ref, rec);
  for (int i = 0; i < 6; ++i) {
    long double sum = 0;
    for (int k = 0; k < 1024; ++k) {
      const long double x = ref[i * 1024 + k];
      const long double y = std::min(1.0L, std::max(0.0L, static_cast<long double>(rec[i * 1024 + k])));
      sum += (x - y) * (x - y);
    }
    const double oracle = static_cast<double>(10.0L * std::log10(1.0L / (sum / 1024.0L)));
    EXPECT_NEAR(got[i], oracle, 1e-9);
  }
}

TEST(PsnrTest, RejectsShapeMismatch) {
  EXPECT_THROW(Psnr(Tensor<float>({1, 1, 2, 2}), Tensor<float>({1, 1, 2, 3})), ShapeError);
}

// ---- bands and CSV -----------------------------------------------------

RDCurveSet TwoCurves(double a, double b, int t_max = 3) {
  RDCurveSet set;
  for (int s = 0; s < 2; ++s) {
    for (int t = 1; t <= t_max; ++t) {
      RDPoint p;
      p.regime = Regime::kDistributed;
      p.num_sources = 2;
      p.source_id = s;
      p.t = t;
      p.bpp = 0.03125 * t;
      p.psnr_db = (s == 0 ? a : b) + 0.1 * t;
      set.points.push_back(p);
    }
  }
  return set;
}

TEST(ConfidenceBandTest, MeanAndSampleDeviation) {
  const ConfidenceBand same = ComputeConfidenceBand(TwoCurves(20, 20));
  for (double sd : same.sd) EXPECT_EQ(sd, 0.0);
  const ConfidenceBand band = ComputeConfidenceBand(TwoCurves(20, 22));
  EXPECT_NEAR(band.mean[0], 21.1, 1e-12);
  EXPECT_NEAR(band.sd[0], std::sqrt(2.0), 1e-12);
  RDCurveSet single;
  single.points.push_back(TwoCurves(1, 1).points[0]);
  EXPECT_FALSE(ComputeConfidenceBand(single).has_band());
  EXPECT_THROW(ComputeConfidenceBand(RDCurveSet{}), std::invalid_argument);
}

TEST(RdCsvTest, RoundTripRowCountAndByteIdenticalReexport) {
  RDCurveSet set = TwoCurves(20.123456789012345, 21.5, 4);
  set.points[3].bpp_denominator = BppDenominator::kOriginal;
  set.points[3].seed = 12345678901234ULL;
  testing::TempDir dir("rd");
  WriteRdCsv(set, dir / "a.csv");
  const std::string text = Slurp(dir / "a.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 4);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "regime,M,strategy,seed,source_id,t,bpp,psnr_db,psnr_domain,bpp_denominator");
  const RDCurveSet back = ReadRdCsv(dir / "a.csv");
  EXPECT_EQ(back, set);
  WriteRdCsv(back, dir / "b.csv");
  EXPECT_EQ(Slurp(dir / "b.csv"), text);
  std::ofstream(dir / "bad.csv") << "regime,M\n";
  EXPECT_THROW(ReadRdCsv(dir / "bad.csv"), FormatError);
}

TEST(RdPlotTest, WritesSvgWithBand) {
  testing::TempDir dir("plot");
  const PlotSeries series[] = {{"distributed", TwoCurves(20, 22)}, {"separate", TwoCurves(18, 23)}};
  WriteRdPlotSvg(series, "test", dir / "p.svg");
  const std::string svg = Slurp(dir / "p.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n') > 5, true);
  EXPECT_NE(svg.find("<polygon"), std::string::npos);
  EXPECT_NE(svg.find("separate"), std::string::npos);
}

// ---- end-to-end evaluation ---------------------------------------------

class EvalFixture : public ::testing::Test {
 protected:
  Dataset test_ = SyntheticDataset(90, 17);
  SourceSplit split_ = SplitByLabel(test_, 3);
};

TEST_F(EvalFixture, CurvesHaveIncreasingBppAndPooledMean) {
  const TrainedSystem s = InitSystem(TinyTrainConfig(Regime::kDistributed, 3));
  const RDCurveSet rd = RdEval(s, test_, split_);
  EXPECT_EQ(rd.Sources(), (std::vector<int>{-1, 0, 1, 2}));
  EXPECT_EQ(rd.points.size(), 4u * 4u);
  for (int id : rd.Sources()) {
    const auto curve = rd.Curve(id);
    for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_GT(curve[k].bpp, curve[k - 1].bpp);
    EXPECT_EQ(curve.front().psnr_domain, "padded_canvas");
  }
  // Equal source sizes: pooled mean equals the mean of the source means.
  EXPECT_NEAR(rd.Curve(-1)[2].psnr_db, rd.MeanPsnrAt(3), 1e-9);
}

TEST_F(EvalFixture, ChunkingDoesNotChangeResults) {
  const TrainedSystem s = InitSystem(TinyTrainConfig(Regime::kDistributed, 3));
  EvalOptions small;
  small.chunk = 4;
  EXPECT_EQ(RdEval(s, test_, split_), RdEval(s, test_, split_, small));
}

TEST_F(EvalFixture, RobustnessIsBitExactAndReadOnly) {
  TrainedSystem s = InitSystem(TinyTrainConfig(Regime::kDistributed, 3));
  const auto hash_before = s.DecoderHash(0);
  const RDCurveSet full = RdEval(s, test_, split_);
  const int all[] = {2, 0, 1};
  EXPECT_EQ(RobustnessEval(s, test_, split_, all), full);
  for (int m = 0; m < 3; ++m) {
    const int only[] = {m};
    const RDCurveSet one = RobustnessEval(s, test_, split_, only);
    EXPECT_EQ(one.Curve(m), full.Curve(m)) << "source " << m;
  }
  const int pair[] = {0, 2};
  EXPECT_EQ(RobustnessEval(s, test_, split_, pair).Curve(2), full.Curve(2));
  EXPECT_EQ(s.DecoderHash(0), hash_before);
  EXPECT_THROW(RobustnessEval(s, test_, split_, {}), std::invalid_argument);
  const int dup[] = {1, 1};
  EXPECT_THROW(RobustnessEval(s, test_, split_, dup), std::invalid_argument);
  const TrainedSystem sep = InitSystem(TinyTrainConfig(Regime::kSeparate, 3));
  EXPECT_THROW(RobustnessEval(sep, test_, split_, pair), std::invalid_argument);
}

TEST_F(EvalFixture, SingleSourceDistributedMatchesJoint) {
  const SourceSplit one = SplitRandom(test_, 1, 0);
  const TrainedSystem joint = InitSystem(TinyTrainConfig(Regime::kJoint, 1));
  const TrainedSystem dist = InitSystem(TinyTrainConfig(Regime::kDistributed, 1));
  const auto a = RdEval(joint, test_, one).Curve(0);
  const auto b = RdEval(dist, test_, one).Curve(0);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].psnr_db, b[k].psnr_db);
}

TEST_F(EvalFixture, SeparateUsesEachSourcesOwnPair) {
  const TrainedSystem sep = InitSystem(TinyTrainConfig(Regime::kSeparate, 3));
  const RDCurveSet rd = RdEval(sep, test_, split_);
  const Dataset src1 = test_.Subset(split_.Indices(1));
  const Tensor<float> padded = PadToCanvas(src1.images, 32, 32);
  const auto trace = Compress(padded, 4, sep.EncoderFor(1), sep.DecoderFor(1), BinarizeMode::kDeterministic);
  EXPECT_EQ(rd.Curve(1)[3].psnr_db, Psnr(padded, ReconstructionToPixels(trace.partial_recons[3])));
}

TEST_F(EvalFixture, RejectsMismatchedSplits) {
  const TrainedSystem s = InitSystem(TinyTrainConfig(Regime::kDistributed, 3));
  EXPECT_THROW(RdEval(s, test_, SplitByLabel(test_, 2)), DataError);
  EvalOptions bad;
  bad.chunk = 0;
  EXPECT_THROW(RdEval(s, test_, split_, bad), std::invalid_argument);
}

TEST_F(EvalFixture, OriginalDenominatorScalesBpp) {
  const TrainedSystem s = InitSystem(TinyTrainConfig(Regime::kJoint, 1));
  EvalOptions o;
  o.bpp_denominator = BppDenominator::kOriginal;
  const auto curve = RdEval(s, test_, SplitRandom(test_, 1, 0), o).Curve(0);
  EXPECT_DOUBLE_EQ(curve[0].bpp, 32.0 / 784.0);
}

}  // namespace
}  // namespace drasic
