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

#include "drasic/grad_check.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace drasic {

GradCheckReport GradCheck(const std::function<Var<double>()>& fn,
                          std::span<const NamedParameter<double>> params, double epsilon,
                          FiniteDifference method) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("grad_check epsilon must be positive");
  for (const auto& p : params) p.var->ZeroGrad();
  Var<double> out = fn();
  Backward(out);

  GradCheckReport report;
  for (const auto& p : params) {
    Tensor<double>& value = p.var->mutable_value();
    const Tensor<double> analytic = p.var->has_grad() ? p.var->grad() : Tensor<double>(value.shape());
    for (std::size_t i = 0; i < value.size(); ++i) {
      const std::string location = p.name + "[" + std::to_string(i) + "]";
      const double saved = value[i];
      auto central_at = [&](double step) {
        value[i] = saved + step;
        const double plus = fn().value()[0];
        value[i] = saved - step;
        const double minus = fn().value()[0];
        value[i] = saved;
        return (plus - minus) / (2.0 * step);
      };
      const double coarse = central_at(epsilon);
      const double central = method == FiniteDifference::kCentral
                                 ? coarse
                                 : (4.0 * central_at(epsilon / 2.0) - coarse) / 3.0;
      const double a = analytic[i];
      ++report.elements_checked;
      if (!std::isfinite(a) || !std::isfinite(central)) {
        if (report.all_finite) report.non_finite_location = location;
        report.all_finite = false;
        continue;
      }
      const double denom = std::max({std::abs(a), std::abs(central), 1e-8});
      const double rel = std::abs(a - central) / denom;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_location = location;
      }
    }
    p.var->ZeroGrad();
  }
  return report;
}

Tensor<double> RandomProjection(const Shape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Tensor<double> w(shape);
  for (auto& v : w.values()) v = dist(rng);
  return w;
}

}  // namespace drasic
