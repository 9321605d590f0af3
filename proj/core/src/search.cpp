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

#include "takd/search.hpp"

#include <algorithm>
#include <utility>

#include "takd/errors.hpp"
#include "takd/rng.hpp"

namespace takd::harness {

SearchResult hyper_search(const SearchSpace& space, int budget,
                          const distill::DistillConfig& base,
                          const Objective& objective, std::uint64_t seed) {
  if (space.temperatures.empty() || space.lambdas.empty()) {
    throw ConfigError("search grid is empty");
  }
  if (budget < 1) throw ConfigError("search budget must be >= 1");
  std::vector<std::pair<double, double>> grid;
  for (double t : space.temperatures) {
    for (double l : space.lambdas) grid.emplace_back(t, l);
  }
  Rng rng = Rng::substream(seed, "search");
  rng.shuffle(grid);
  const std::size_t trials =
      std::min(grid.size(), static_cast<std::size_t>(budget));

  SearchResult result;
  for (std::size_t i = 0; i < trials; ++i) {
    distill::DistillConfig cfg = base;
    cfg.temperature = grid[i].first;
    cfg.lambda = grid[i].second;
    cfg.validate();
    const double value = objective(cfg);
    result.trials.push_back({cfg.temperature, cfg.lambda, value});
    if (i == 0 || value > result.best_objective) {
      result.best = cfg;
      result.best_objective = value;
      result.best_trial = i;
    }
  }
  return result;
}

}  // namespace takd::harness
