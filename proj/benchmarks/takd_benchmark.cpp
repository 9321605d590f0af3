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

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "takd/dataset.hpp"
#include "takd/distill.hpp"
#include "takd/graph.hpp"
#include "takd/model.hpp"
#include "takd/network.hpp"
#include "takd/planner.hpp"
#include "takd/rng.hpp"

namespace {

using takd::Rng;
namespace ad = takd::ad;
namespace zoo = takd::zoo;

ad::Tensor RandomTensor(std::vector<std::size_t> shape, std::uint64_t seed) {
  ad::Tensor t(std::move(shape));
  Rng rng(seed);
  for (float& v : t.storage()) v = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto spec =
      zoo::make_mlp(static_cast<int>(state.range(0)), 32, 2, 3, true);
  auto params = zoo::init_parameters(spec, 1);
  const ad::Tensor x = RandomTensor({64, 2}, 2);
  const std::vector<int> labels(64, 1);
  for (auto _ : state) {
    ad::Graph<float> g;
    const ad::Var logits =
        zoo::forward(g, spec, params, g.input(x), {.training = true});
    const ad::Var loss = g.softmax_cross_entropy(logits, labels);
    params.zero_grad();
    g.backward(loss);
    benchmark::DoNotOptimize(g.value(loss).item());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_MlpForwardBackward)->Arg(1)->Arg(3)->Arg(5);

void BM_CnnForwardBackward(benchmark::State& state) {
  const auto spec = zoo::parse_architecture(
      zoo::Family::kPlainCnn, "CB8, MP, CB16, MP, FC10", {1, 28, 28});
  auto params = zoo::init_parameters(spec, 1);
  const ad::Tensor x = RandomTensor({16, 1, 28, 28}, 2);
  const std::vector<int> labels(16, 3);
  for (auto _ : state) {
    ad::Graph<float> g;
    const ad::Var logits =
        zoo::forward(g, spec, params, g.input(x), {.training = true});
    const ad::Var loss = g.softmax_cross_entropy(logits, labels);
    params.zero_grad();
    g.backward(loss);
    benchmark::DoNotOptimize(g.value(loss).item());
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_CnnForwardBackward);

void BM_DistillEpoch(benchmark::State& state) {
  const auto data = takd::harness::gen_synthetic(
      takd::harness::SyntheticKind::kSpirals, 3000, 3, 0.2, 0);
  takd::distill::DistillConfig cfg;
  cfg.epochs = 1;
  const auto teacher =
      takd::distill::train(zoo::make_mlp(5, 32, 2, 3, true), data, cfg);
  const auto student = zoo::make_mlp(1, 32, 2, 3, true);
  for (auto _ : state) {
    const auto m = takd::distill::train(student, data, cfg, &teacher);
    benchmark::DoNotOptimize(m.metrics.test_acc);
  }
}
BENCHMARK(BM_DistillEpoch)->Unit(benchmark::kMillisecond);

void BM_DpOptimalPath(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<int> sizes;
  for (int s = 2 * n; s >= 0; s -= 2) sizes.push_back(s + 1);
  const takd::planner::SizeLadder ladder{sizes};
  auto evaluator = takd::planner::SurrogateEvaluator::random(ladder, 7);
  for (auto _ : state) {
    takd::planner::ModelCache cache;
    const auto result =
        takd::planner::dp_optimal_path(ladder, n / 2 + 1, evaluator, cache);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_DpOptimalPath)->Arg(6)->Arg(12)->Arg(24);

void BM_ModelRoundTrip(benchmark::State& state) {
  const auto model = zoo::build_model(zoo::make_mlp(5, 64, 2, 3, true), 3);
  for (auto _ : state) {
    const auto bytes = zoo::serialize_model(model);
    const auto back = zoo::deserialize_model(bytes);
    benchmark::DoNotOptimize(back.params.size());
  }
}
BENCHMARK(BM_ModelRoundTrip);

}  // namespace

BENCHMARK_MAIN();
