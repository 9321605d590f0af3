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

#include "takd/distill.hpp"

#include <chrono>
#include <cstdio>

#include "takd/errors.hpp"
#include "takd/network.hpp"
#include "takd/rng.hpp"

namespace takd::distill {

using nlohmann::json;

void DistillConfig::validate() const {
  if (!(temperature > 0.0)) {
    throw ParameterError("temperature must be positive");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ParameterError("lambda must lie in [0, 1]");
  }
  if (epochs <= 0) throw ParameterError("epochs must be positive");
  if (batch_size <= 0) throw ParameterError("batch_size must be positive");
  optimizer.validate();
}

json to_json(const DistillConfig& cfg) {
  json schedule = json::array();
  for (const auto& d : cfg.optimizer.schedule) {
    schedule.push_back({{"epoch", d.epoch}, {"lr", d.lr}});
  }
  return {{"temperature", cfg.temperature},
          {"lambda", cfg.lambda},
          {"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"seed", cfg.seed},
          {"optimizer",
           {{"learning_rate", cfg.optimizer.learning_rate},
            {"momentum", cfg.optimizer.momentum},
            {"weight_decay", cfg.optimizer.weight_decay},
            {"nesterov", cfg.optimizer.nesterov},
            {"schedule", schedule}}}};
}

DistillConfig distill_config_from_json(const json& j, DistillConfig base) {
  DistillConfig cfg = std::move(base);
  try {
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("optimizer")) {
      const json& o = j.at("optimizer");
      auto& opt = cfg.optimizer;
      opt.learning_rate = o.value("learning_rate", opt.learning_rate);
      opt.momentum = o.value("momentum", opt.momentum);
      opt.weight_decay = o.value("weight_decay", opt.weight_decay);
      opt.nesterov = o.value("nesterov", opt.nesterov);
      if (o.contains("schedule")) {
        opt.schedule.clear();
        for (const auto& d : o.at("schedule")) {
          opt.schedule.push_back(
              {d.at("epoch").get<int>(), d.at("lr").get<double>()});
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("distill config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string canonical_hash(const json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

std::string config_hash(const DistillConfig& cfg) {
  return canonical_hash(to_json(cfg));
}

template <class T>
ad::Var kd_loss(ad::Graph<T>& g, ad::Var student_logits, ad::Var teacher_logits,
                double temperature) {
  if (!(temperature > 0.0)) {
    throw ParameterError("kd_loss: temperature must be positive");
  }
  if (g.value(student_logits).shape() != g.value(teacher_logits).shape()) {
    throw DimensionError("kd_loss: student and teacher logits differ in shape");
  }
  return g.softmax_kl(student_logits, teacher_logits, temperature);
}

template <class T>
ad::Var student_loss(ad::Graph<T>& g, ad::Var student_logits,
                     std::optional<ad::Var> teacher_logits,
                     std::span<const int> labels, double lambda,
                     double temperature) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ParameterError("student_loss: lambda must lie in [0, 1]");
  }
  if (lambda == 0.0) {
    return g.softmax_cross_entropy(student_logits, labels);
  }
  if (!teacher_logits) {
    throw UsageError("student_loss: lambda > 0 needs teacher logits");
  }
  const ad::Var kd = kd_loss(g, student_logits, *teacher_logits, temperature);
  if (lambda == 1.0) return kd;
  const ad::Var ce = g.softmax_cross_entropy(student_logits, labels);
  return g.add(g.scale(ce, 1.0 - lambda), g.scale(kd, lambda));
}

template ad::Var kd_loss<float>(ad::Graph<float>&, ad::Var, ad::Var, double);
template ad::Var kd_loss<double>(ad::Graph<double>&, ad::Var, ad::Var, double);
template ad::Var student_loss<float>(ad::Graph<float>&, ad::Var,
                                     std::optional<ad::Var>,
                                     std::span<const int>, double, double);
template ad::Var student_loss<double>(ad::Graph<double>&, ad::Var,
                                      std::optional<ad::Var>,
                                      std::span<const int>, double, double);

double kd_loss_value(const ad::Tensor& student_logits,
                     const ad::Tensor& teacher_logits, double temperature) {
  ad::Graph<float> g;
  const ad::Var s = g.input(student_logits);
  const ad::Var t = g.input(teacher_logits);
  return g.value(kd_loss(g, s, t, temperature)).item();
}

double student_loss_value(const ad::Tensor& student_logits,
                          const ad::Tensor* teacher_logits,
                          std::span<const int> labels, double lambda,
                          double temperature) {
  ad::Graph<float> g;
  const ad::Var s = g.input(student_logits);
  std::optional<ad::Var> t;
  if (teacher_logits) t = g.input(*teacher_logits);
  return g.value(student_loss(g, s, t, labels, lambda, temperature)).item();
}

namespace {

std::size_t argmax_row(std::span<const float> row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < row.size(); ++c) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

double logits_accuracy(const ad::Tensor& logits,
                       const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  const std::size_t cols = logits.dim(1);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const auto row = logits.data().subspan(r * cols, cols);
    if (static_cast<int>(argmax_row(row)) == labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace

double accuracy(const zoo::NetworkSpec& spec, const ad::ParameterSet& params,
                const harness::Split& split) {
  if (split.size() == 0) return 0.0;
  return logits_accuracy(zoo::predict_logits(spec, params, split.features),
                         split.labels);
}

zoo::TrainedModel train(const zoo::NetworkSpec& spec,
                        const harness::Dataset& data, const DistillConfig& cfg,
                        const zoo::TrainedModel* teacher,
                        TrainHistory* history) {
  cfg.validate();
  const auto start_time = std::chrono::steady_clock::now();
  if (teacher) {
    if (teacher->spec.num_classes != spec.num_classes) {
      throw ConfigError(
          "teacher emits " + std::to_string(teacher->spec.num_classes) +
          " classes, student " + std::to_string(spec.num_classes));
    }
    if (ad::shape_numel(teacher->spec.input_shape) !=
        ad::shape_numel(spec.input_shape)) {
      throw ConfigError("teacher and student input shapes differ");
    }
  }
  const double lambda = teacher ? cfg.lambda : 0.0;

  zoo::TrainedModel model = zoo::build_model(spec, cfg.seed);
  const harness::Split& tr = data.train;
  const std::size_t n = tr.size();
  if (n == 0) throw ConfigError("training split is empty");
  const std::size_t width = tr.features.numel() / n;
  const std::size_t classes = static_cast<std::size_t>(spec.num_classes);

  ad::Tensor teacher_logits;
  if (teacher && lambda > 0.0) {
    teacher_logits =
        zoo::predict_logits(teacher->spec, teacher->params, tr.features);
  }

  Rng shuffle_rng = Rng::substream(cfg.seed, "shuffle");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

  TrainHistory local;
  std::vector<float> xb;
  std::vector<float> tb;
  std::vector<int> yb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    const double lr = cfg.optimizer.lr_at_epoch(epoch);
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t count = std::min(bs, n - start);
      xb.resize(count * width);
      yb.resize(count);
      if (!teacher_logits.empty()) tb.resize(count * classes);
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t row = order[start + k];
        std::copy_n(tr.features.data().begin() + row * width, width,
                    xb.begin() + k * width);
        yb[k] = tr.labels[row];
        if (!teacher_logits.empty()) {
          std::copy_n(teacher_logits.data().begin() + row * classes, classes,
                      tb.begin() + k * classes);
        }
      }
      ad::Shape shape = tr.features.shape();
      shape[0] = count;
      model.params.zero_grad();
      ad::Graph<float> g;
      const ad::Var x = g.input(ad::Tensor(shape, xb));
      const ad::Var logits =
          zoo::forward(g, spec, model.params, x,
                       {.training = true, .update_running_stats = true});
      std::optional<ad::Var> t;
      if (!teacher_logits.empty()) {
        t = g.input(ad::Tensor(ad::Shape{count, classes}, tb));
      }
      const ad::Var loss =
          student_loss(g, logits, t, yb, lambda, cfg.temperature);
      g.backward(loss);
      ad::sgd_nesterov_step(model.params, cfg.optimizer, lr);

      const auto& lv = g.value(logits);
      for (std::size_t k = 0; k < count; ++k) {
        const auto row = lv.data().subspan(k * classes, classes);
        if (static_cast<int>(argmax_row(row)) == yb[k]) ++correct;
      }
    }
    local.train_acc.push_back(static_cast<double>(correct) /
                              static_cast<double>(n));
    local.test_acc.push_back(accuracy(spec, model.params, data.test));
  }

  model.metrics.train_acc = accuracy(spec, model.params, data.train);
  model.metrics.test_acc = local.test_acc.empty() ? 0.0 : local.test_acc.back();
  model.provenance.seed = cfg.seed;
  model.provenance.config_hash = config_hash(cfg);
  model.provenance.distillation_path =
      teacher ? teacher->provenance.distillation_path : std::vector<int>{};
  model.provenance.distillation_path.push_back(spec.size);
  model.provenance.mode =
      zoo::mode_for_path_length(model.provenance.distillation_path.size());
  local.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start_time)
                           .count();
  if (history) *history = std::move(local);
  return model;
}

void validate_path(const std::vector<int>& path) {
  if (path.empty()) throw PathError("distillation path is empty");
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] <= 0)
      throw PathError("distillation path sizes must be positive");
    if (i > 0 && path[i] >= path[i - 1]) {
      throw PathError("distillation path must be strictly decreasing");
    }
  }
}

std::vector<ChainStep> distill_chain(
    const std::vector<int>& path, const std::map<int, zoo::NetworkSpec>& specs,
    const harness::Dataset& data, const std::vector<DistillConfig>& configs,
    const zoo::TrainedModel* pretrained_teacher) {
  validate_path(path);
  if (configs.size() != 1 && configs.size() != path.size()) {
    throw ConfigError("distill_chain: need one shared config or one per step");
  }
  for (int size : path) {
    if (!specs.contains(size)) {
      throw PathError("distill_chain: no network spec for size " +
                      std::to_string(size));
    }
  }
  std::vector<ChainStep> steps;
  steps.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    const DistillConfig& cfg = configs.size() == 1 ? configs[0] : configs[i];
    ChainStep step;
    if (i == 0 && pretrained_teacher &&
        pretrained_teacher->spec.size == path[0]) {
      step.model = *pretrained_teacher;
    } else {
      const zoo::TrainedModel* teacher = i == 0 ? nullptr : &steps.back().model;
      step.model = train(specs.at(path[i]), data, cfg, teacher, &step.history);
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

ad::GradientCheckReport check_model_gradients(
    const zoo::NetworkSpec& spec, const ad::ParameterSet& params,
    const ad::Tensor& features, std::span<const int> labels,
    const ad::Tensor* teacher_logits, double lambda, double temperature,
    const ad::GradientCheckOptions& options) {
  ad::CheckParameterSet p = params.cast<double>();
  const ad::BasicTensor<double> x = features.cast<double>();
  std::optional<ad::BasicTensor<double>> t;
  if (teacher_logits) t = teacher_logits->cast<double>();
  const std::vector<int> y(labels.begin(), labels.end());
  const ad::LossBuilder build = [&](ad::Graph<double>& g,
                                    ad::CheckParameterSet& ps) {
    const ad::Var in = g.input(x);
    const ad::Var logits = zoo::forward(
        g, spec, ps, in, {.training = true, .update_running_stats = false});
    std::optional<ad::Var> tv;
    if (t) tv = g.input(*t);
    return student_loss(g, logits, tv, y, lambda, temperature);
  };
  return ad::gradient_check(p, build, options);
}

}  // namespace takd::distill
