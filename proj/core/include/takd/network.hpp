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
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "takd/graph.hpp"
#include "takd/parameters.hpp"

namespace takd::zoo {

enum class Family { kMlp, kPlainCnn };
enum class LayerKind { kDense, kConv, kMaxPool };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

// One cell of an architecture. `units` is the output width of a dense layer
// or the output channel count of a 3x3 convolution; max-pool ignores it.
struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  int units = 0;
  bool batch_norm = false;
  bool relu = true;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Architecture description. `size` is the capacity proxy: the number of
// hidden dense layers for MLPs and the number of conv layers for plain CNNs.
struct NetworkSpec {
  Family family = Family::kMlp;
  int size = 1;
  std::vector<LayerSpec> layers;
  int num_classes = 2;
  // {features} for MLPs, {channels, height, width} for CNNs.
  std::vector<std::size_t> input_shape;

  // Walks the layer chain; throws SpecError on any inconsistency.
  void validate() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const nlohmann::json& j);

// Desk-scale MLP: `size` hidden layers of `width` relu units.
NetworkSpec make_mlp(int size, int width, std::size_t input_dim,
                     int num_classes, bool batch_norm = false);

// Parses a cell list such as "CB16, MP, CB16, MP, FC10". CB is a 3x3 conv
// followed by batch normalization and relu, C a conv with relu only, MP a
// 3x3/2 max-pool and FC a dense layer (relu unless it is the last cell).
NetworkSpec parse_architecture(Family family, std::string_view cells,
                               std::vector<std::size_t> input_shape);

// Plain-CNN ladders for 32x32x3 inputs, sizes 2/4/6/8/10.
NetworkSpec plain_cnn_cifar10(int size);
NetworkSpec plain_cnn_cifar100(int size);

// Exact count of trainable scalars.
std::size_t model_capacity(const NetworkSpec& spec);

struct ForwardOptions {
  bool training = false;
  // Only meaningful in training mode.
  bool update_running_stats = false;
};

// Parameters in spec order, initialized from the "init" substream of `seed`:
// weights ~ N(0, 2/fan_in), biases 0, batch-norm scale 1 / shift 0, running
// mean 0 / variance 1.
ad::ParameterSet init_parameters(const NetworkSpec& spec, std::uint64_t seed);

template <class T>
ad::Var forward(ad::Graph<T>& graph, const NetworkSpec& spec,
                ad::BasicParameterSet<T>& params, ad::Var input,
                const ForwardOptions& options);

// Evaluation-mode logits for `features` ([N x ...]), computed in chunks.
ad::Tensor predict_logits(const NetworkSpec& spec,
                          const ad::ParameterSet& params,
                          const ad::Tensor& features, std::size_t chunk = 512);

}  // namespace takd::zoo
