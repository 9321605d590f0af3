// Copyright 2026 The TAKD Workbench Authors
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

#include "takd/gradient_check.hpp"

#include <algorithm>
#include <cmath>

namespace takd::ad {
namespace {

struct Probe {
  double loss;
  std::uint64_t signature;
};

Probe evaluate(CheckParameterSet& params, const LossBuilder& loss) {
  Graph<double> g;
  const Var out = loss(g, params);
  return {g.value(out).item(), g.kink_signature()};
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

std::vector<BasicTensor<double>> analytic_gradients(CheckParameterSet& params,
                                                    const LossBuilder& loss) {
  params.zero_grad();
  Graph<double> g;
  const Var out = loss(g, params);
  g.backward(out);
  std::vector<BasicTensor<double>> grads;
  grads.reserve(params.size());
  for (const auto& p : params) {
    grads.push_back(p.trainable ? p.grad
                                : BasicTensor<double>(p.value.shape()));
  }
  return grads;
}

GradientCheckReport compare_with_finite_differences(
    CheckParameterSet& params, const LossBuilder& loss,
    const std::vector<BasicTensor<double>>& analytic,
    const GradientCheckOptions& options) {
  if (analytic.size() != params.size()) {
    throw DimensionError("gradient check: analytic gradient count mismatch");
  }
  const std::uint64_t base_signature = evaluate(params, loss).signature;
  GradientCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    if (!p.trainable) continue;
    ParameterCheck check;
    check.name = p.name;
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      const double original = p.value[i];
      p.value[i] = original + options.step;
      const Probe plus = evaluate(params, loss);
      p.value[i] = original - options.step;
      const Probe minus = evaluate(params, loss);
      p.value[i] = original;
      if (options.skip_kinks && (plus.signature != base_signature ||
                                 minus.signature != base_signature)) {
        ++check.skipped;
        continue;
      }
      const double numeric = (plus.loss - minus.loss) / (2.0 * options.step);
      const double err =
          relative_error(analytic[k][i], numeric, options.magnitude_floor);
      check.max_rel_error = std::max(check.max_rel_error, err);
      ++check.checked;
    }
    check.passed = check.max_rel_error < options.tolerance;
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.passed = report.passed && check.passed;
    report.parameters.push_back(std::move(check));
  }
  return report;
}

GradientCheckReport gradient_check(CheckParameterSet& params,
                                   const LossBuilder& loss,
                                   const GradientCheckOptions& options) {
  const auto analytic = analytic_gradients(params, loss);
  return compare_with_finite_differences(params, loss, analytic, options);
}

}  // namespace takd::ad
