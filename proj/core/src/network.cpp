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

#include "takd/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "takd/errors.hpp"
#include "takd/rng.hpp"

namespace takd::zoo {

using nlohmann::json;

std::string_view family_name(Family f) {
  return f == Family::kMlp ? "mlp" : "plain-cnn";
}

Family parse_family(std::string_view name) {
  if (name == "mlp") return Family::kMlp;
  if (name == "plain-cnn") return Family::kPlainCnn;
  throw SpecError("unknown network family '" + std::string(name) + "'");
}

namespace {

std::string_view kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kConv:
      return "conv";
    case LayerKind::kMaxPool:
      return "maxpool";
  }
  return "?";
}

LayerKind parse_kind(std::string_view s) {
  if (s == "dense") return LayerKind::kDense;
  if (s == "conv") return LayerKind::kConv;
  if (s == "maxpool") return LayerKind::kMaxPool;
  throw SpecError("unknown layer kind '" + std::string(s) + "'");
}

std::string layer_prefix(std::size_t i) {
  return "layers." + std::to_string(i) + ".";
}

// Shape bookkeeping shared by validation, capacity and initialization.
// Visits every parameter tensor in spec order.
template <class Visitor>
void walk_parameters(const NetworkSpec& spec, Visitor&& visit) {
  if (spec.layers.empty()) throw SpecError("network has no layers");
  std::vector<std::size_t> cur = spec.input_shape;
  if (cur.empty()) throw SpecError("input_shape is empty");
  for (std::size_t d : cur) {
    if (d == 0) throw SpecError("input_shape has a zero dimension");
  }
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    const std::string at = " (layer " + std::to_string(i) + ")";
    switch (layer.kind) {
      case LayerKind::kConv: {
        if (cur.size() != 3) {
          throw SpecError("conv layer needs a [C x H x W] input" + at);
        }
        if (layer.units <= 0) throw SpecError("conv channels must be > 0" + at);
        const std::size_t out = static_cast<std::size_t>(layer.units);
        visit(i, "weight", ad::Shape{out, cur[0], 3, 3}, cur[0] * 9, true);
        visit(i, "bias", ad::Shape{out}, 0, true);
        if (layer.batch_norm) {
          visit(i, "bn_scale", ad::Shape{out}, 0, true);
          visit(i, "bn_shift", ad::Shape{out}, 0, true);
          visit(i, "bn_running_mean", ad::Shape{out}, 0, false);
          visit(i, "bn_running_var", ad::Shape{out}, 0, false);
        }
        cur[0] = out;
        break;
      }
      case LayerKind::kMaxPool: {
        if (cur.size() != 3) {
          throw SpecError("maxpool layer needs a [C x H x W] input" + at);
        }
        if (cur[1] < 3 || cur[2] < 3) {
          throw SpecError("maxpool input smaller than its 3x3 window" + at);
        }
        cur[1] = (cur[1] - 3) / 2 + 1;
        cur[2] = (cur[2] - 3) / 2 + 1;
        break;
      }
      case LayerKind::kDense: {
        if (layer.units <= 0) throw SpecError("dense units must be > 0" + at);
        std::size_t in = 1;
        for (std::size_t d : cur) in *= d;
        const std::size_t out = static_cast<std::size_t>(layer.units);
        visit(i, "weight", ad::Shape{out, in}, in, true);
        visit(i, "bias", ad::Shape{out}, 0, true);
        if (layer.batch_norm) {
          visit(i, "bn_scale", ad::Shape{out}, 0, true);
          visit(i, "bn_shift", ad::Shape{out}, 0, true);
          visit(i, "bn_running_mean", ad::Shape{out}, 0, false);
          visit(i, "bn_running_var", ad::Shape{out}, 0, false);
        }
        cur = {out};
        break;
      }
    }
  }
}

}  // namespace

void NetworkSpec::validate() const {
  if (num_classes <= 0) throw SpecError("num_classes must be positive");
  if (size < 0) throw SpecError("size must be >= 0");
  walk_parameters(*this, [](auto&&...) {});
  const LayerSpec& last = layers.back();
  if (last.kind != LayerKind::kDense || last.units != num_classes) {
    throw SpecError("last layer must be a dense layer with num_classes units");
  }
  if (last.relu || last.batch_norm) {
    throw SpecError("last layer must emit raw logits (no relu / batch norm)");
  }
  int dense = 0, conv = 0;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::kDense) ++dense;
    if (l.kind == LayerKind::kConv) ++conv;
  }
  if (family == Family::kMlp) {
    if (conv > 0 || input_shape.size() != 1) {
      throw SpecError("mlp family takes flat inputs and dense layers only");
    }
    if (size != dense - 1) {
      throw SpecError("mlp size " + std::to_string(size) + " != " +
                      std::to_string(dense - 1) + " hidden dense layers");
    }
  } else {
    if (input_shape.size() != 3) {
      throw SpecError("plain-cnn family takes [C x H x W] inputs");
    }
    if (size != conv) {
      throw SpecError("plain-cnn size " + std::to_string(size) +
                      " != " + std::to_string(conv) + " conv layers");
    }
  }
}

json to_json(const NetworkSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers) {
    layers.push_back({{"kind", kind_name(l.kind)},
                      {"units", l.units},
                      {"batch_norm", l.batch_norm},
                      {"relu", l.relu}});
  }
  return {{"family", family_name(spec.family)},
          {"size", spec.size},
          {"num_classes", spec.num_classes},
          {"input_shape", spec.input_shape},
          {"layers", layers}};
}

NetworkSpec network_spec_from_json(const json& j) {
  try {
    NetworkSpec spec;
    spec.family = parse_family(j.at("family").get<std::string>());
    spec.size = j.at("size").get<int>();
    spec.num_classes = j.at("num_classes").get<int>();
    spec.input_shape = j.at("input_shape").get<std::vector<std::size_t>>();
    for (const auto& l : j.at("layers")) {
      LayerSpec layer;
      layer.kind = parse_kind(l.at("kind").get<std::string>());
      layer.units = l.value("units", 0);
      layer.batch_norm = l.value("batch_norm", false);
      layer.relu = l.value("relu", layer.kind != LayerKind::kMaxPool);
      spec.layers.push_back(layer);
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw SpecError(std::string("network spec: ") + e.what());
  }
}

NetworkSpec make_mlp(int size, int width, std::size_t input_dim,
                     int num_classes, bool batch_norm) {
  NetworkSpec spec;
  spec.family = Family::kMlp;
  spec.size = size;
  spec.num_classes = num_classes;
  spec.input_shape = {input_dim};
  for (int i = 0; i < size; ++i) {
    spec.layers.push_back({LayerKind::kDense, width, batch_norm, true});
  }
  spec.layers.push_back({LayerKind::kDense, num_classes, false, false});
  spec.validate();
  return spec;
}

NetworkSpec parse_architecture(Family family, std::string_view cells,
                               std::vector<std::size_t> input_shape) {
  NetworkSpec spec;
  spec.family = family;
  spec.input_shape = std::move(input_shape);
  std::string token;
  std::vector<std::string> tokens;
  for (char c : cells) {
    if (c == ',') {
      tokens.push_back(token);
      token.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      token.push_back(c);
    }
  }
  tokens.push_back(token);
  int conv = 0, dense = 0;
  for (const auto& t : tokens) {
    auto number = [&](std::size_t from) {
      if (from >= t.size()) throw SpecError("cell '" + t + "' lacks a width");
      try {
        return std::stoi(t.substr(from));
      } catch (const std::exception&) {
        throw SpecError("cell '" + t + "' has a malformed width");
      }
    };
    if (t == "MP") {
      spec.layers.push_back({LayerKind::kMaxPool, 0, false, false});
    } else if (t.rfind("CB", 0) == 0) {
      spec.layers.push_back({LayerKind::kConv, number(2), true, true});
      ++conv;
    } else if (t.rfind("FC", 0) == 0) {
      spec.layers.push_back({LayerKind::kDense, number(2), false, true});
      ++dense;
    } else if (t.rfind("C", 0) == 0) {
      spec.layers.push_back({LayerKind::kConv, number(1), false, true});
      ++conv;
    } else {
      throw SpecError("unknown architecture cell '" + t + "'");
    }
  }
  if (spec.layers.empty() || spec.layers.back().kind != LayerKind::kDense) {
    throw SpecError("architecture must end with an FC cell");
  }
  spec.layers.back().relu = false;
  spec.num_classes = spec.layers.back().units;
  spec.size = family == Family::kMlp ? dense - 1 : conv;
  spec.validate();
  return spec;
}

namespace {

NetworkSpec cifar_ladder(int size, const char* const table[5]) {
  if (size < 2 || size > 10 || size % 2) {
    throw SpecError("plain-cnn ladder sizes are 2, 4, 6, 8, 10");
  }
  return parse_architecture(Family::kPlainCnn, table[size / 2 - 1],
                            {3, 32, 32});
}

}  // namespace

NetworkSpec plain_cnn_cifar10(int size) {
  static const char* const kTable[5] = {
      "CB16, MP, CB16, MP, FC10",
      "CB16, CB16, MP, CB32, CB32, MP, FC10",
      "CB16, CB16, MP, CB32, CB32, MP, CB64, CB64, MP, FC10",
      "CB16, CB16, MP, CB32, CB32, MP, CB64, CB64, MP, CB128, CB128, MP, "
      "FC64, FC10",
      "CB32, CB32, MP, CB64, CB64, MP, CB128, CB128, MP, CB256, CB256, CB256, "
      "CB256, MP, FC128, FC10",
  };
  return cifar_ladder(size, kTable);
}

NetworkSpec plain_cnn_cifar100(int size) {
  static const char* const kTable[5] = {
      "CB32, MP, CB32, MP, FC100",
      "CB32, CB32, MP, CB64, CB64, MP, FC100",
      "CB32, CB32, MP, CB64, CB64, MP, CB128, CB128, FC100",
      "CB32, CB32, MP, CB64, CB64, MP, CB128, CB128, MP, CB256, CB256, MP, "
      "FC64, FC100",
      "CB32, CB32, MP, CB64, CB64, MP, CB128, CB128, MP, CB256, CB256, CB256, "
      "CB256, MP, FC512, FC100",
  };
  return cifar_ladder(size, kTable);
}

std::size_t model_capacity(const NetworkSpec& spec) {
  std::size_t total = 0;
  walk_parameters(spec, [&](std::size_t, const char*, const ad::Shape& shape,
                            std::size_t, bool trainable) {
    if (trainable) total += ad::shape_numel(shape);
  });
  return total;
}

ad::ParameterSet init_parameters(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng = Rng::substream(seed, "init");
  ad::ParameterSet params;
  walk_parameters(
      spec, [&](std::size_t layer, const char* role, const ad::Shape& shape,
                std::size_t fan_in, bool trainable) {
        ad::Tensor t(shape);
        const std::string r = role;
        if (r == "weight") {
          const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
          for (auto& v : t.storage())
            v = static_cast<float>(rng.gaussian() * stddev);
        } else if (r == "bn_scale" || r == "bn_running_var") {
          t.fill(1.0f);
        }
        params.add(layer_prefix(layer) + r, std::move(t), trainable);
      });
  return params;
}

template <class T>
ad::Var forward(ad::Graph<T>& graph, const NetworkSpec& spec,
                ad::BasicParameterSet<T>& params, ad::Var input,
                const ForwardOptions& options) {
  std::size_t cursor = 0;
  auto next = [&]() -> ad::Parameter<T>& {
    if (cursor >= params.size()) {
      throw SpecError("parameter set is shorter than the network spec");
    }
    return params[cursor++];
  };
  ad::Var x = input;
  const auto& in_shape = graph.value(x).shape();
  std::size_t per_row = 1;
  for (std::size_t d : spec.input_shape) per_row *= d;
  if (in_shape.empty() || graph.value(x).numel() != in_shape[0] * per_row) {
    throw DimensionError("forward: input " + ad::shape_string(in_shape) +
                         " does not match spec input shape");
  }
  if (spec.input_shape.size() == 3 && in_shape.size() != 4) {
    ad::Shape s{in_shape[0]};
    s.insert(s.end(), spec.input_shape.begin(), spec.input_shape.end());
    x = graph.input(graph.value(x).reshaped(s));
  }
  for (const LayerSpec& layer : spec.layers) {
    switch (layer.kind) {
      case LayerKind::kConv: {
        const ad::Var w = graph.parameter(next());
        const ad::Var b = graph.parameter(next());
        x = graph.conv2d(x, w, b);
        break;
      }
      case LayerKind::kMaxPool:
        x = graph.maxpool2d(x);
        break;
      case LayerKind::kDense: {
        if (graph.value(x).rank() != 2) x = graph.flatten(x);
        const ad::Var w = graph.parameter(next());
        const ad::Var b = graph.parameter(next());
        x = graph.dense(x, w, b);
        break;
      }
    }
    if (layer.batch_norm) {
      const ad::Var scale = graph.parameter(next());
      const ad::Var shift = graph.parameter(next());
      ad::Parameter<T>& mean = next();
      ad::Parameter<T>& var = next();
      const bool update = options.training && options.update_running_stats;
      x = graph.batch_norm(
          x, scale, shift, update || !options.training ? &mean : nullptr,
          update || !options.training ? &var : nullptr, options.training);
    }
    if (layer.relu) x = graph.relu(x);
  }
  if (cursor != params.size()) {
    throw SpecError("parameter set is longer than the network spec");
  }
  return x;
}

template ad::Var forward<float>(ad::Graph<float>&, const NetworkSpec&,
                                ad::BasicParameterSet<float>&, ad::Var,
                                const ForwardOptions&);
template ad::Var forward<double>(ad::Graph<double>&, const NetworkSpec&,
                                 ad::BasicParameterSet<double>&, ad::Var,
                                 const ForwardOptions&);

ad::Tensor predict_logits(const NetworkSpec& spec,
                          const ad::ParameterSet& params,
                          const ad::Tensor& features, std::size_t chunk) {
  if (features.rank() == 0) throw DimensionError("predict_logits: no rows");
  const std::size_t n = features.dim(0);
  const std::size_t row = n ? features.numel() / n : 0;
  ad::ParameterSet local = params;
  ad::Tensor out(ad::Shape{n, static_cast<std::size_t>(spec.num_classes)});
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t count = std::min(chunk, n - start);
    ad::Shape shape = features.shape();
    shape[0] = count;
    std::vector<float> slice(features.data().begin() + start * row,
                             features.data().begin() + (start + count) * row);
    ad::Graph<float> g;
    const ad::Var x = g.input(ad::Tensor(shape, std::move(slice)));
    const ad::Var logits = forward(g, spec, local, x, {.training = false});
    const auto& v = g.value(logits);
    std::copy(v.data().begin(), v.data().end(),
              out.storage().begin() + start * spec.num_classes);
  }
  return out;
}

}  // namespace takd::zoo
