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

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "takd/graph.hpp"

namespace takd::ad {

using CheckParameterSet = BasicParameterSet<double>;
// Builds a scalar loss from the parameters. Must be a pure function of the
// parameter values (no running-statistic updates).
using LossBuilder = std::function<Var(Graph<double>&, CheckParameterSet&)>;

struct GradientCheckOptions {
  double step = 1e-3;
  double tolerance = 1e-4;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double magnitude_floor = 1e-4;
  // Skip entries whose +/- probes change a relu mask, a max-pool argmax or a
  // clamp decision; central differences are meaningless across a kink.
  bool skip_kinks = true;
};

struct ParameterCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  bool passed = true;
};

struct GradientCheckReport {
  std::vector<ParameterCheck> parameters;
  double max_rel_error = 0.0;
  bool passed = true;
};

double relative_error(double analytic, double numeric, double floor);

// Reverse-mode gradients of the loss, one tensor per parameter entry
// (zero tensors for non-trainable entries).
std::vector<BasicTensor<double>> analytic_gradients(CheckParameterSet& params,
                                                    const LossBuilder& loss);

GradientCheckReport compare_with_finite_differences(
    CheckParameterSet& params, const LossBuilder& loss,
    const std::vector<BasicTensor<double>>& analytic,
    const GradientCheckOptions& options = {});

GradientCheckReport gradient_check(CheckParameterSet& params,
                                   const LossBuilder& loss,
                                   const GradientCheckOptions& options = {});

}  // namespace takd::ad
