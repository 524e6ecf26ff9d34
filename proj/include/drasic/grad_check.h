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

#ifndef DRASIC_GRAD_CHECK_H_
#define DRASIC_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "drasic/convlstm.h"

namespace drasic {

struct GradCheckReport {
  // max over all checked elements of
  //   |analytic - central| / max(|analytic|, |central|, 1e-8)
  double max_relative_error = 0.0;
  std::string worst_location;
  bool all_finite = true;
  std::string non_finite_location;
  std::size_t elements_checked = 0;

  bool Passed(double tolerance) const { return all_finite && max_relative_error < tolerance; }
};

enum class FiniteDifference {
  kCentral,     // (f(x + e) - f(x - e)) / 2e, error O(e^2)
  kRichardson,  // (4 D(e / 2) - D(e)) / 3 over central D, error O(e^4)
};

// Compares reverse-mode gradients of `fn` against finite differences with
// step `epsilon`, perturbing every element of every listed parameter in
// place (values are restored afterwards). `fn` must rebuild its graph from
// the current parameter values on each call and return a scalar.
// Richardson extrapolation suits graphs whose gradients span many orders of
// magnitude: it allows a step large enough to clear rounding noise on tiny
// gradients without paying the curvature error of a plain central step.
GradCheckReport GradCheck(const std::function<Var<double>()>& fn,
                          std::span<const NamedParameter<double>> params, double epsilon,
                          FiniteDifference method = FiniteDifference::kCentral);

// Fixed pseudo-random weights in [-1, 1] for reducing a tensor output to a
// scalar; every element then carries a non-trivial gradient.
Tensor<double> RandomProjection(const Shape& shape, std::uint64_t seed);

}  // namespace drasic

#endif  // DRASIC_GRAD_CHECK_H_
