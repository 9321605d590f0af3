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
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "takd/dataset.hpp"
#include "takd/distill.hpp"
#include "takd/model.hpp"

namespace takd::planner {

// Available network sizes ordered by capacity, teacher first:
// q0 = T > q1 > ... > qn = S.
struct SizeLadder {
  std::vector<int> sizes;

  // Throws LadderError unless n >= 1 and the sizes strictly decrease.
  void validate() const;
  std::size_t n() const { return sizes.size() - 1; }
  int teacher() const { return sizes.front(); }
  int student() const { return sizes.back(); }
};

SizeLadder parse_ladder(std::string_view text);  // "10,8,6,4,2"

// Result of evaluating one node of a distillation path.
struct Outcome {
  std::vector<int> path;
  double accuracy = 0.0;
  double loss = 1.0;                               // 1 - accuracy
  std::shared_ptr<const zoo::TrainedModel> model;  // real-training mode only
};

// Where in the ladder an edge sits: step `depth` (1-based) distills ladder
// index `from` into ladder index `to`.
struct EdgeContext {
  int depth = 1;
  std::size_t from = 0;
  std::size_t to = 0;
};

class PathEvaluator {
 public:
  virtual ~PathEvaluator() = default;
  // The teacher itself, trained without distillation.
  virtual Outcome root(int teacher_size) = 0;
  // BLKD(teacher -> target_size): one distillation step.
  virtual Outcome distill(const Outcome& teacher, int target_size,
                          const EdgeContext& edge) = 0;
};

// Deterministic stand-in for training:
//   acc(q | teacher p with accuracy a) =
//       base(q) + beta * (a - base(q)) * exp(-gamma * (cap(p)/cap(q) - 1))
// clipped to [0, 1]; loss = 1 - acc. Capacity defaults to the size itself.
class SurrogateEvaluator : public PathEvaluator {
 public:
  struct Params {
    std::map<int, double> base;  // scratch accuracy per size
    std::map<int, double> capacity;
    double beta = 0.6;
    double gamma = 0.3;
  };

  explicit SurrogateEvaluator(Params params);

  // Random pure surrogate over `ladder`: base accuracies increasing with
  // size, beta in [0.3, 0.9], gamma in [0.05, 1].
  static SurrogateEvaluator random(const SizeLadder& ladder,
                                   std::uint64_t seed);

  Outcome root(int teacher_size) override;
  Outcome distill(const Outcome& teacher, int target_size,
                  const EdgeContext& edge) override;

  double transfer(double teacher_acc, int from_size, int to_size) const;
  const Params& params() const { return params_; }

 private:
  double base(int size) const;
  double capacity(int size) const;
  Params params_;
};

// Looks up tabulated accuracies by full path (teacher first). The root's
// accuracy is the entry for the one-element path.
class TableEvaluator : public PathEvaluator {
 public:
  explicit TableEvaluator(std::map<std::vector<int>, double> accuracy);
  Outcome root(int teacher_size) override;
  Outcome distill(const Outcome& teacher, int target_size,
                  const EdgeContext& edge) override;

 private:
  Outcome lookup(std::vector<int> path) const;
  std::map<std::vector<int>, double> accuracy_;
};

// Counts distill() calls on a wrapped evaluator.
class CountingEvaluator : public PathEvaluator {
 public:
  explicit CountingEvaluator(PathEvaluator& inner) : inner_(inner) {}
  Outcome root(int teacher_size) override { return inner_.root(teacher_size); }
  Outcome distill(const Outcome& teacher, int target_size,
                  const EdgeContext& edge) override {
    ++calls_;
    return inner_.distill(teacher, target_size, edge);
  }
  std::size_t calls() const { return calls_; }

 private:
  PathEvaluator& inner_;
  std::size_t calls_ = 0;
};

// Real distillation: each edge trains the target network with
// distill::train. The edge seed is derived from (root seed, depth, from, to),
// so two searches that evaluate the same edge from the same teacher get the
// same model. Results are memoized by (path, edge).
class TrainingEvaluator : public PathEvaluator {
 public:
  TrainingEvaluator(std::map<int, zoo::NetworkSpec> specs,
                    const harness::Dataset& data, distill::DistillConfig base,
                    std::uint64_t root_seed,
                    std::shared_ptr<const zoo::TrainedModel> teacher = nullptr);

  Outcome root(int teacher_size) override;
  Outcome distill(const Outcome& teacher, int target_size,
                  const EdgeContext& edge) override;

  static std::uint64_t edge_seed(std::uint64_t root_seed, const EdgeContext& e);
  std::size_t trainings() const { return trainings_; }

 private:
  std::map<int, zoo::NetworkSpec> specs_;
  const harness::Dataset& data_;
  distill::DistillConfig base_;
  std::uint64_t root_seed_;
  std::shared_ptr<const zoo::TrainedModel> teacher_;
  std::map<std::pair<std::vector<int>, std::uint64_t>, Outcome> memo_;
  std::size_t trainings_ = 0;
};

// w_d(q_j) and p_d(q_j) of the dynamic program. Each key is written once.
class ModelCache {
 public:
  struct Entry {
    Outcome outcome;
    std::size_t predecessor = 0;  // ladder index i* (0 at depth 1)
  };

  // Throws UsageError when (depth, index) is already present.
  void put(int depth, std::size_t index, Entry entry);
  const Entry* get(int depth, std::size_t index) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<int, std::size_t>, Entry> entries_;
};

struct EdgeRecord {
  EdgeContext edge;
  std::vector<int> teacher_path;
  int target = 0;
  double accuracy = 0.0;
  double loss = 0.0;
};

struct PlanResult {
  Outcome best;
  std::vector<int> path;
  std::size_t evaluator_calls = 0;
  std::vector<EdgeRecord> edges;
};

// All 2^(n-1) paths from T to S, one per subset of interior sizes, in
// ascending subset-bitmask order (bit b selects ladder index b + 1).
std::vector<std::vector<int>> enumerate_paths(const SizeLadder& ladder);

// Every intermediate TA in decreasing order: the ladder itself.
std::vector<int> full_path(const SizeLadder& ladder);

// Optimal length-k path by dynamic programming over (depth, size):
//   w_1(q_i) = BLKD(T -> q_i) for i = 1..n
//   w_d(q_j) = argmin_{0<i<j} loss(BLKD(w_{d-1}(q_i) -> q_j)), d = 2..k
// with ties resolved towards the smallest i (largest TA). States (d, j) that
// cannot reach S in exactly k - d further steps are not evaluated. Uses at
// most n + (k-1) n (n-1) / 2 evaluator calls.
PlanResult dp_optimal_path(const SizeLadder& ladder, int k,
                           PathEvaluator& evaluator, ModelCache& cache);

// Exhaustive search over the C(n-1, k-1) length-k paths, each evaluated end
// to end. Among equal losses it prefers the path the DP tie rule selects:
// compare interior ladder indices from the student end backwards, smaller
// index first.
PlanResult brute_force_optimal_path(const SizeLadder& ladder, int k,
                                    PathEvaluator& evaluator,
                                    std::size_t max_paths = 100000);

// Interior size whose scratch accuracy is closest to the mean of the
// teacher's and student's; ties go to the smaller size.
int suggest_ta_size(const SizeLadder& ladder,
                    const std::map<int, double>& scratch_accuracy);

nlohmann::json to_json(const PlanResult& result, const SizeLadder& ladder,
                       int k);
// Every path prefix from T to every ladder size, evaluated, as an adjacency
// list: {"nodes": [{id, path, size, accuracy}], "adjacency": {id: [ids]}}.
nlohmann::json path_graph_json(const SizeLadder& ladder,
                               PathEvaluator& evaluator);

}  // namespace takd::planner
