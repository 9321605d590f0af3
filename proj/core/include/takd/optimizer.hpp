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

#include <vector>

#include "takd/parameters.hpp"

namespace takd::ad {

// Step-schedule entry: from `epoch` onward the learning rate is `lr`.
struct LrDrop {
  int epoch = 0;
  double lr = 0.0;
  friend bool operator==(const LrDrop&, const LrDrop&) = default;
};

struct OptimizerConfig {
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0;
  bool nesterov = true;
  std::vector<LrDrop> schedule;

  // Throws ParameterError on a positive-lr / momentum-range / ordering
  // violation.
  void validate() const;
  double lr_at_epoch(int epoch) const;

  friend bool operator==(const OptimizerConfig&,
                         const OptimizerConfig&) = default;
};

// SGD with optional Nesterov momentum and L2 weight decay, applied to every
// trainable parameter:
//   g <- g + wd * w;  v <- mu * v + g;
//   w <- w - lr * (g + mu * v)   (nesterov)
//   w <- w - lr * v              (classical)
template <class T>
void sgd_nesterov_step(BasicParameterSet<T>& params, const OptimizerConfig& cfg,
                       double learning_rate) {
  const T lr = static_cast<T>(learning_rate);
  const T mu = static_cast<T>(cfg.momentum);
  const T wd = static_cast<T>(cfg.weight_decay);
  for (auto& p : params) {
    if (!p.trainable) continue;
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      T g = p.grad[i];
      if (wd != T{0}) g += wd * p.value[i];
      const T v = mu * p.velocity[i] + g;
      p.velocity[i] = v;
      p.value[i] -= cfg.nesterov ? lr * (g + mu * v) : lr * v;
    }
  }
}

template <class T>
void sgd_nesterov_step(BasicParameterSet<T>& params,
                       const OptimizerConfig& cfg) {
  sgd_nesterov_step(params, cfg, cfg.learning_rate);
}

}  // namespace takd::ad
