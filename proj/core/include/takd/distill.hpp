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
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "takd/dataset.hpp"
#include "takd/gradient_check.hpp"
#include "takd/graph.hpp"
#include "takd/model.hpp"
#include "takd/optimizer.hpp"

namespace takd::distill {

// Hyperparameters of one training run: temperature and trade-off of the
// combined student loss, plus the optimizer schedule.
struct DistillConfig {
  double temperature = 4.0;
  double lambda = 0.5;
  int epochs = 60;
  int batch_size = 64;
  ad::OptimizerConfig optimizer;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const DistillConfig&, const DistillConfig&) = default;
};

nlohmann::json to_json(const DistillConfig& cfg);
// Fields absent from `j` keep their value in `base`.
DistillConfig distill_config_from_json(const nlohmann::json& j,
                                       DistillConfig base = {});
// Hex FNV-1a of the canonical (sorted-key) JSON serialization.
std::string config_hash(const DistillConfig& cfg);
std::string canonical_hash(const nlohmann::json& j);

// tau^2 * KL(softmax(teacher / tau) || softmax(student / tau)), batch mean.
// The teacher logits are treated as constants.
template <class T>
ad::Var kd_loss(ad::Graph<T>& g, ad::Var student_logits, ad::Var teacher_logits,
                double temperature);

// (1 - lambda) * CE(softmax(student), labels) + lambda * kd_loss. With
// lambda == 0 the result is the cross-entropy node itself and the teacher
// may be absent; with lambda == 1 it is the kd_loss node itself.
template <class T>
ad::Var student_loss(ad::Graph<T>& g, ad::Var student_logits,
                     std::optional<ad::Var> teacher_logits,
                     std::span<const int> labels, double lambda,
                     double temperature);

// Plain-value conveniences for tests and tools.
double kd_loss_value(const ad::Tensor& student_logits,
                     const ad::Tensor& teacher_logits, double temperature);
double student_loss_value(const ad::Tensor& student_logits,
                          const ad::Tensor* teacher_logits,
                          std::span<const int> labels, double lambda,
                          double temperature);

double accuracy(const zoo::NetworkSpec& spec, const ad::ParameterSet& params,
                const harness::Split& split);

struct TrainHistory {
  std::vector<double> train_acc;  // running minibatch accuracy per epoch
  std::vector<double> test_acc;   // eval-mode test accuracy per epoch
  double wall_seconds = 0.0;
};

// Shuffled mini-batch SGD on the student loss. Without a teacher lambda is
// forced to 0 and the result is a NOKD model. The teacher is never modified;
// its logits are computed once, in evaluation mode.
zoo::TrainedModel train(const zoo::NetworkSpec& spec,
                        const harness::Dataset& data, const DistillConfig& cfg,
                        const zoo::TrainedModel* teacher = nullptr,
                        TrainHistory* history = nullptr);

struct ChainStep {
  zoo::TrainedModel model;
  TrainHistory history;
};

// Trains path[0] from scratch (or adopts `pretrained_teacher` when its size
// matches path[0]) and then distills each next size from the previous
// model. `configs` holds either one shared config or one per path entry.
std::vector<ChainStep> distill_chain(
    const std::vector<int>& path, const std::map<int, zoo::NetworkSpec>& specs,
    const harness::Dataset& data, const std::vector<DistillConfig>& configs,
    const zoo::TrainedModel* pretrained_teacher = nullptr);

// Throws PathError unless sizes are strictly decreasing and non-empty.
void validate_path(const std::vector<int>& path);

// Gradient check of the full student loss (training-mode forward, running
// statistics frozen) in double precision.
ad::GradientCheckReport check_model_gradients(
    const zoo::NetworkSpec& spec, const ad::ParameterSet& params,
    const ad::Tensor& features, std::span<const int> labels,
    const ad::Tensor* teacher_logits, double lambda, double temperature,
    const ad::GradientCheckOptions& options = {});

}  // namespace takd::distill
