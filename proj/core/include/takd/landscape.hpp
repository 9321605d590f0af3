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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "takd/dataset.hpp"
#include "takd/model.hpp"
#include "takd/parameters.hpp"

namespace takd::landscape {

// Two perturbation directions with the same layout as a parameter set.
struct Directions {
  std::vector<std::vector<double>> delta;  // one block per parameter
  std::vector<std::vector<double>> eta;
  std::uint64_t seed = 0;
};

// Gaussian directions rescaled so that every filter (first-axis slice of a
// weight tensor: a conv output filter or a dense output row) has the norm of
// the matching model filter. Biases, batch-norm and non-trainable entries
// are zero.
Directions filter_normalized_directions(const ad::ParameterSet& params,
                                        std::uint64_t seed);

struct LossSurface {
  std::vector<std::vector<double>> grid;  // grid[i][j] at (a_i, b_j)
  std::vector<double> coords;             // a_i = radius * (i - r) / r
  double radius = 0.0;
  int steps = 1;  // grid points per axis, 2r + 1
  double center_loss = 0.0;
  std::uint64_t seed = 0;
  bool has_non_finite = false;

  int r() const { return (steps - 1) / 2; }
};

// Loss over the grid for an arbitrary loss(a, b). `steps` must be odd.
LossSurface loss_surface(const std::function<double(double, double)>& loss,
                         double radius, int steps);

// Cross-entropy of the model on `split` in evaluation mode at
// w + a * delta + b * eta.
LossSurface loss_surface(const zoo::TrainedModel& model,
                         const harness::Split& split, const Directions& dirs,
                         double radius, int steps);

// Loss of the unperturbed model, computed exactly as the grid center is.
double model_loss(const zoo::TrainedModel& model, const harness::Split& split);

inline constexpr int kFlatnessSamples = 360;

// Mean of (loss - center loss) over the unit circle, with the surface
// bilinearly interpolated. Needs radius >= 1.
double flatness_metric(const LossSurface& surface);

// "a,b,loss" rows in row-major order, 9 significant digits.
std::string to_csv(const LossSurface& surface);

}  // namespace takd::landscape
