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
#include <vector>

#include "takd/distill.hpp"

namespace takd::harness {

struct SearchSpace {
  std::vector<double> temperatures{1, 2, 4, 8, 16, 20};
  std::vector<double> lambdas{0.05, 0.25, 0.5, 0.75, 0.95};
};

struct Trial {
  double temperature = 0.0;
  double lambda = 0.0;
  double objective = 0.0;
};

struct SearchResult {
  distill::DistillConfig best;
  double best_objective = 0.0;
  std::size_t best_trial = 0;
  std::vector<Trial> trials;
};

inline constexpr int kDefaultBudget = 15;

// Higher is better (test accuracy).
using Objective = std::function<double(const distill::DistillConfig&)>;

// Seeded random search: the (temperature, lambda) grid product is shuffled
// with the "search" substream of `seed` and the first min(budget, |grid|)
// points are tried in order. The best objective wins; ties keep the first.
SearchResult hyper_search(const SearchSpace& space, int budget,
                          const distill::DistillConfig& base,
                          const Objective& objective, std::uint64_t seed);

}  // namespace takd::harness
