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

#include "takd/optimizer.hpp"

#include <string>

#include "takd/errors.hpp"

namespace takd::ad {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw ParameterError("optimizer: learning_rate must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ParameterError("optimizer: momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) {
    throw ParameterError("optimizer: weight_decay must be nonnegative");
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i].lr > 0.0)) {
      throw ParameterError("optimizer: schedule lr must be positive");
    }
    if (i > 0 && schedule[i].epoch <= schedule[i - 1].epoch) {
      throw ParameterError(
          "optimizer: schedule epochs must be strictly increasing (entry " +
          std::to_string(i) + ")");
    }
  }
}

double OptimizerConfig::lr_at_epoch(int epoch) const {
  double lr = learning_rate;
  for (const auto& drop : schedule) {
    if (epoch >= drop.epoch) lr = drop.lr;
  }
  return lr;
}

}  // namespace takd::ad
