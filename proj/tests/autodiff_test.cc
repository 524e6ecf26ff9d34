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
#include <vector>

#include "drasic/grad_check.h"
#include "test_util.h"

namespace drasic {
namespace {

using testing::RandomTensor;

constexpr double kGradTolerance = 1e-4;
constexpr double kEpsilon = 1e-5;
constexpr std::uint64_t kGradPoints = 10;  // random parameter points per operation

Var<double> Param(const Shape& shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  return Var<double>::Parameter(RandomTensor<double>(shape, seed, lo, hi));
}

// ---- tensors and shape diagnostics -------------------------------------

TEST(TensorTest, RejectsValueCountMismatchWithShapeInMessage) {
  try {
    Tensor<float>({2, 3}, std::vector<float>(5));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("[2, 3]"), std::string::npos);
  }
}

TEST(TensorTest, GatherAndSliceBatch) {
  Tensor<float> t({3, 1, 1, 2}, {0, 1, 2, 3, 4, 5});
  const int idx[] = {2, 0};
  const Tensor<float> g = GatherBatch(t, idx);
  EXPECT_EQ(g.shape(), (Shape{2, 1, 1, 2}));
  EXPECT_EQ(g[0], 4);
  EXPECT_EQ(g[3], 1);
  EXPECT_EQ(SliceBatch(t, 1, 2)[0], 2);
  EXPECT_THROW(SliceBatch(t, 2, 2), ShapeError);
}

// ---- elementwise ops ---------------------------------------------------

TEST(OpsTest, TanhValues) {
  auto x = Var<double>::Parameter(Tensor<double>({3}, {0.0, 20.0, 0.5}));
  const Var<double> y = Tanh(x);
  EXPECT_DOUBLE_EQ(y.value()[0], 0.0);
  EXPECT_NEAR(y.value()[1], 1.0, 1e-9);
  // Reference value from an independent math library evaluation.
  EXPECT_NEAR(y.value()[2], 0.46211715726000974, 1e-12);
  Backward(WeightedSum(y, Tensor<double>({3}, {1.0, 0.0, 0.0})));
  EXPECT_DOUBLE_EQ(x.grad()[0], 1.0);
}

TEST(OpsTest, SigmoidValues) {
  auto x = Var<double>::Constant(Tensor<double>({3}, {0.0, -800.0, 800.0}));
  const Var<double> y = Sigmoid(x);
  EXPECT_DOUBLE_EQ(y.value()[0], 0.5);
  EXPECT_GE(y.value()[1], 0.0);
  EXPECT_NEAR(y.value()[1], 0.0, 1e-300);
  EXPECT_DOUBLE_EQ(y.value()[2], 1.0);
}

TEST(OpsTest, ElementwiseShapeMismatchNamesBothShapes) {
  auto a = Var<double>::Constant(Tensor<double>({2, 2}));
  auto b = Var<double>::Constant(Tensor<double>({4}));
  try {
    Add(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2, 2]"), std::string::npos);
    EXPECT_NE(msg.find("[4]"), std::string::npos);
  }
}

TEST(OpsTest, DepthToSpaceLayout) {
  // Channel c*r*r + i*r + j of a 1x1 pixel lands at (i, j).
  auto x = Var<double>::Constant(Tensor<double>({1, 4, 1, 1}, {10, 11, 12, 13}));
  const Var<double> y = DepthToSpace(x, 2);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 2, 2}));
  EXPECT_EQ(y.value().at(0, 0, 0, 0), 10);
  EXPECT_EQ(y.value().at(0, 0, 0, 1), 11);
  EXPECT_EQ(y.value().at(0, 0, 1, 0), 12);
  EXPECT_EQ(y.value().at(0, 0, 1, 1), 13);
  EXPECT_THROW(DepthToSpace(Var<double>::Constant(Tensor<double>({1, 3, 1, 1})), 2), ShapeError);
}

TEST(OpsTest, LossReductions) {
  auto a = Var<double>::Constant(Tensor<double>({4}, {1, 2, 3, 4}));
  auto b = Var<double>::Constant(Tensor<double>({4}, {1, 0, 3, 8}));
  EXPECT_DOUBLE_EQ(MeanSquaredError(a, b).value()[0], (4.0 + 16.0) / 4.0);
  EXPECT_DOUBLE_EQ(MeanAbsoluteError(a, b).value()[0], (2.0 + 4.0) / 4.0);
}

TEST(AutodiffTest, NoGradGuardSkipsRecording) {
  auto x = Param({3}, 1);
  {
    NoGradGuard guard;
    EXPECT_FALSE(GradEnabled());
    EXPECT_FALSE(Tanh(x).requires_grad());
  }
  EXPECT_TRUE(GradEnabled());
  EXPECT_TRUE(Tanh(x).requires_grad());
}

TEST(AutodiffTest, SharedSubexpressionAccumulatesGradient) {
  auto x = Var<double>::Parameter(Tensor<double>({1}, {3.0}));
  const Var<double> y = Mul(x, x) + x;  // dy/dx = 2x + 1
  Backward(y);
  EXPECT_DOUBLE_EQ(x.grad()[0], 7.0);
}

TEST(AutodiffTest, BackwardRequiresScalar) {
  auto x = Param({2}, 1);
  EXPECT_THROW(Backward(Tanh(x)), std::exception);
}

// ---- convolution -------------------------------------------------------

TEST(ConvTest, IdentityKernelIsIdentity) {
  const ConvSpec spec{3, 3, 1, 1, 0};
  Tensor<double> w(spec.WeightShape());
  for (int c = 0; c < 3; ++c) w.at(c, c, 0, 0) = 1.0;
  const Tensor<double> bias({3});
  const Tensor<double> x = RandomTensor<double>({2, 3, 5, 7}, 9);
  EXPECT_TRUE(Conv2dForward(x, w, &bias, spec).BitwiseEqual(x));
}

TEST(ConvTest, ZeroWeightsGiveZeroOutputOfSpecShape) {
  const ConvSpec spec{2, 5, 3, 2, 1};
  const Tensor<double> w(spec.WeightShape());
  const Tensor<double> bias({5});
  const Tensor<double> y = Conv2dForward(RandomTensor<double>({1, 2, 9, 9}, 2), w, &bias, spec);
  EXPECT_EQ(y.shape(), (Shape{1, 5, 5, 5}));
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(ConvTest, AveragingKernelOnConstantInput) {
  const ConvSpec spec{1, 1, 3, 1, 1};
  const Tensor<double> w(spec.WeightShape(), 1.0 / 9.0);
  const Tensor<double> x({1, 1, 6, 6}, 7.0);
  const Tensor<double> y = Conv2dForward<double>(x, w, nullptr, spec);
  EXPECT_NEAR(y.at(0, 0, 2, 3), 7.0, 1e-12);
  EXPECT_NEAR(y.at(0, 0, 0, 0), 7.0 * 4.0 / 9.0, 1e-12);
  EXPECT_NEAR(y.at(0, 0, 0, 3), 7.0 * 6.0 / 9.0, 1e-12);
}

// Independent oracle: direct six-deep loop convolution.
Tensor<double> NaiveConv(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& b,
                         const ConvSpec& s) {
  const int n = x.dim(0), h = x.dim(2), wd = x.dim(3);
  const int ho = s.OutputExtent(h), wo = s.OutputExtent(wd);
  Tensor<double> y({n, s.out_channels, ho, wo});
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < s.out_channels; ++o)
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          double acc = b[o];
          for (int c = 0; c < s.in_channels; ++c)
            for (int ky = 0; ky < s.kernel_size; ++ky)
              for (int kx = 0; kx < s.kernel_size; ++kx) {
                const int iy = oy * s.stride - s.padding + ky, ix = ox * s.stride - s.padding + kx;
                if (iy >= 0 && iy < h && ix >= 0 && ix < wd) acc += x.at(i, c, iy, ix) * w.at(o, c, ky, kx);
              }
          y.at(i, o, oy, ox) = acc;
        }
  return y;
}

TEST(ConvTest, MatchesDirectLoopOracle) {
  for (const ConvSpec spec : {ConvSpec{3, 4, 3, 1, 1}, ConvSpec{3, 4, 3, 2, 1}, ConvSpec{3, 2, 1, 1, 0},
                              ConvSpec{2, 3, 5, 2, 2}, ConvSpec{1, 2, 3, 3, 0}}) {
    const Tensor<double> x = RandomTensor<double>({2, spec.in_channels, 7, 8}, 4);
    const Tensor<double> w = RandomTensor<double>(spec.WeightShape(), 5);
    const Tensor<double> b = RandomTensor<double>({spec.out_channels}, 6);
    const Tensor<double> got = Conv2dForward(x, w, &b, spec);
    const Tensor<double> want = NaiveConv(x, w, b, spec);
    ASSERT_EQ(got.shape(), want.shape());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(ConvTest, BatchCompositionDoesNotChangePerImageResult) {
  const ConvSpec spec{2, 3, 3, 2, 1};
  const Tensor<float> x = RandomTensor<float>({5, 2, 8, 8}, 7);
  const Tensor<float> w = RandomTensor<float>(spec.WeightShape(), 8);
  const Tensor<float> all = Conv2dForward<float>(x, w, nullptr, spec);
  const Tensor<float> one = Conv2dForward<float>(SliceBatch(x, 3, 1), w, nullptr, spec);
  EXPECT_TRUE(SliceBatch(all, 3, 1).BitwiseEqual(one));
}

TEST(ConvTest, ShapeErrorsNameTheAxis) {
  const ConvSpec spec{3, 4, 3, 1, 0};
  try {
    spec.OutputShape({1, 2, 8, 8});
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("channel"), std::string::npos) << e.what();
  }
  EXPECT_THROW(spec.OutputShape({1, 3, 2, 8}), ShapeError);  // output height would be 0
  EXPECT_THROW((ConvSpec{1, 1, 0, 1, 0}.Validate()), ShapeError);
  EXPECT_THROW((ConvSpec{1, 1, 3, 0, 0}.Validate()), ShapeError);
}

// ---- gradient checks ---------------------------------------------------

TEST(GradCheckTest, TanhAtZero) {
  auto x = Var<double>::Parameter(Tensor<double>({1}, {0.0}));
  std::vector<NamedParameter<double>> params = {{"x", &x}};
  const auto report = GradCheck([&] { return Tanh(x); }, params, kEpsilon);
  EXPECT_TRUE(report.Passed(1e-6)) << report.max_relative_error << " at " << report.worst_location;
}

TEST(GradCheckTest, RichardsonCancelsCentralTruncationOnCubic) {
  // d/dx x^3 = 3x^2; a central step e reports 3x^2 + e^2, Richardson is exact.
  auto x = Var<double>::Parameter(Tensor<double>({1}, {1.0}));
  std::vector<NamedParameter<double>> params = {{"x", &x}};
  auto cube = [&] { return Mul(x, Mul(x, x)); };
  const auto central = GradCheck(cube, params, 0.1);
  EXPECT_NEAR(central.max_relative_error, 0.01 / 3.01, 1e-9);
  const auto richardson = GradCheck(cube, params, 0.1, FiniteDifference::kRichardson);
  EXPECT_LT(richardson.max_relative_error, 1e-12);
}

TEST(GradCheckTest, TanhAndSigmoidRandom) {
  for (std::uint64_t point = 0; point < kGradPoints; ++point) {
    SCOPED_TRACE(point);
    const std::uint64_t s = 100 * point;
    auto x = Param({3, 4}, 21 + s, -2.0, 2.0);
    const Tensor<double> proj = RandomProjection({3, 4}, 22 + s);
    std::vector<NamedParameter<double>> params = {{"x", &x}};
    auto report = GradCheck([&] { return WeightedSum(Tanh(x), proj); }, params, kEpsilon);
    EXPECT_TRUE(report.Passed(kGradTolerance)) << report.max_relative_error;
    report = GradCheck([&] { return WeightedSum(Sigmoid(x), proj); }, params, kEpsilon);
    EXPECT_TRUE(report.Passed(kGradTolerance)) << report.max_relative_error;
  }
}

TEST(GradCheckTest, Conv2dAllSpecs) {
  for (const ConvSpec spec : {ConvSpec{2, 3, 3, 1, 1}, ConvSpec{2, 3, 3, 2, 1}, ConvSpec{3, 2, 1, 1, 0}}) {
    for (std::uint64_t point = 0; point < kGradPoints; ++point) {
      SCOPED_TRACE(point);
      const std::uint64_t s = 100 * point;
      auto x = Param({2, spec.in_channels, 6, 6}, 31 + s);
      auto w = Param(spec.WeightShape(), 32 + s);
      auto b = Param({spec.out_channels}, 33 + s);
      const Tensor<double> proj = RandomProjection(spec.OutputShape(x.shape()), 34 + s);
      std::vector<NamedParameter<double>> params = {{"x", &x}, {"w", &w}, {"b", &b}};
      const auto report =
          GradCheck([&] { return WeightedSum(Conv2d(x, w, b, spec), proj); }, params, kEpsilon);
      EXPECT_TRUE(report.Passed(kGradTolerance)) << "stride " << spec.stride << ": "
                                                 << report.max_relative_error << " at " << report.worst_location;
    }
  }
}

TEST(GradCheckTest, ElementwiseAndStructuralOps) {
  for (std::uint64_t point = 0; point < kGradPoints; ++point) {
    SCOPED_TRACE(point);
    const std::uint64_t s = 100 * point;
    auto a = Param({2, 4, 2, 2}, 41 + s);
    auto b = Param({2, 4, 2, 2}, 42 + s);
    const Tensor<double> proj_d2s = RandomProjection({2, 1, 4, 4}, 43 + s);
    std::vector<NamedParameter<double>> params = {{"a", &a}, {"b", &b}};
    auto fn = [&] {
      const Var<double> parts[] = {a, Mul(a, b)};
      const Var<double> cat = ConcatBatch<double>(parts);
      const Var<double> d2s = DepthToSpace(Sub(SliceBatch(cat, 2, 2), Scale(b, 0.5) + a), 2);
      const Var<double> losses[] = {WeightedSum(d2s, proj_d2s), MeanSquaredError(a, b)};
      return MeanOf<double>(losses);
    };
    const auto report = GradCheck(fn, params, kEpsilon);
    EXPECT_TRUE(report.Passed(kGradTolerance)) << report.max_relative_error << " at " << report.worst_location;
  }
}

TEST(GradCheckTest, ConvLstmCellFullParameterSet) {
  for (std::uint64_t point = 0; point < kGradPoints; ++point) {
    SCOPED_TRACE(point);
    const std::uint64_t s = 100 * point;
    std::mt19937_64 rng(51 + s);
    ConvLstmLayer<double> layer = MakeConvLstmLayer<double>(3, 2, 3, 2, 3, rng);
    layer.input.bias.mutable_value() = RandomTensor<double>({8}, 52 + s, -0.5, 0.5);
    auto x = Param({2, 3, 6, 6}, 53 + s);
    auto h = Param({2, 2, 3, 3}, 54 + s);
    auto c = Param({2, 2, 3, 3}, 55 + s);
    const Tensor<double> ph = RandomProjection({2, 2, 3, 3}, 56 + s);
    const Tensor<double> pc = RandomProjection({2, 2, 3, 3}, 57 + s);
    std::vector<NamedParameter<double>> params = {{"x", &x}, {"h", &h}, {"c", &c}};
    layer.AppendParameters("cell", params);
    auto fn = [&] {
      const ConvLstmState<double> next = ConvLstmCell(x, {h, c}, layer);
      return WeightedSum(next.hidden, ph) + WeightedSum(next.cell, pc);
    };
    const auto report = GradCheck(fn, params, kEpsilon);
    EXPECT_TRUE(report.Passed(kGradTolerance)) << report.max_relative_error << " at " << report.worst_location;
    EXPECT_GT(report.elements_checked, 300u);
  }
}

// ---- ConvLSTM behaviour ------------------------------------------------

TEST(ConvLstmTest, ZeroEverythingGivesZeroState) {
  std::mt19937_64 rng(1);
  ConvLstmLayer<double> layer = MakeConvLstmLayer<double>(2, 3, 3, 1, 1, rng);
  layer.input.weight.mutable_value().fill(0.0);
  layer.hidden.weight.mutable_value().fill(0.0);
  const auto state = ZeroConvLstmState<double>(1, 3, 4, 4);
  const auto next = ConvLstmCell(Var<double>::Constant(Tensor<double>({1, 2, 4, 4})), state, layer);
  for (double v : next.hidden.value().values()) EXPECT_EQ(v, 0.0);
  for (double v : next.cell.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(ConvLstmTest, LargeNegativeForgetBiasDropsOldCell) {
  constexpr int kHidden = 2;
  std::mt19937_64 rng(2);
  ConvLstmLayer<double> layer = MakeConvLstmLayer<double>(2, kHidden, 3, 1, 1, rng);
  Tensor<double>& bias = layer.input.bias.mutable_value();
  for (int k = 0; k < kHidden; ++k) bias[kHidden + k] = -20.0;  // forget gate block
  const Var<double> x = Var<double>::Constant(RandomTensor<double>({1, 2, 4, 4}, 3));
  const ConvLstmState<double> state{Var<double>::Constant(RandomTensor<double>({1, kHidden, 4, 4}, 4)),
                                    Var<double>::Constant(Tensor<double>({1, kHidden, 4, 4}, 5.0))};
  const auto next = ConvLstmCell(x, state, layer);

  // Evaluate i * g directly from the gate pre-activations.
  Tensor<double> pre = Conv2dForward(x.value(), layer.input.weight.value(), &bias, layer.input.spec);
  const Tensor<double> hpre =
      Conv2dForward<double>(state.hidden.value(), layer.hidden.weight.value(), nullptr, layer.hidden.spec);
  for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += hpre[i];
  for (int k = 0; k < kHidden; ++k) {
    for (int y = 0; y < 4; ++y) {
      for (int xx = 0; xx < 4; ++xx) {
        const double i_gate = 1.0 / (1.0 + std::exp(-pre.at(0, k, y, xx)));
        const double g_gate = std::tanh(pre.at(0, 3 * kHidden + k, y, xx));
        EXPECT_NEAR(next.cell.value().at(0, k, y, xx), i_gate * g_gate, 1e-7);
      }
    }
  }
}

TEST(ConvLstmTest, RepeatedCallsAreDeterministic) {
  std::mt19937_64 rng(3);
  const ConvLstmLayer<float> layer = MakeConvLstmLayer<float>(1, 4, 3, 2, 1, rng);
  const Var<float> x = Var<float>::Constant(RandomTensor<float>({2, 1, 8, 8}, 4));
  const auto s0 = ZeroConvLstmState<float>(2, 4, 4, 4);
  const auto a1 = ConvLstmCell(x, s0, layer), b1 = ConvLstmCell(x, s0, layer);
  const auto a2 = ConvLstmCell(x, a1, layer), b2 = ConvLstmCell(x, b1, layer);
  EXPECT_TRUE(a2.hidden.value().BitwiseEqual(b2.hidden.value()));
  EXPECT_TRUE(a2.cell.value().BitwiseEqual(b2.cell.value()));
}

TEST(ConvLstmTest, StateShapeMismatchIsRejected) {
  std::mt19937_64 rng(4);
  const ConvLstmLayer<float> layer = MakeConvLstmLayer<float>(1, 4, 3, 2, 1, rng);
  const Var<float> x = Var<float>::Constant(Tensor<float>({1, 1, 8, 8}));
  EXPECT_THROW(ConvLstmCell(x, ZeroConvLstmState<float>(1, 4, 8, 8), layer), ShapeError);
  EXPECT_THROW(ConvLstmCell(x, ZeroConvLstmState<float>(2, 4, 4, 4), layer), ShapeError);
}

}  // namespace
}  // namespace drasic
