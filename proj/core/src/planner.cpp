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

#include "takd/planner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <string>

#include "takd/errors.hpp"
#include "takd/rng.hpp"

namespace takd::planner {
namespace {

std::string edge_string(const EdgeContext& e) {
  return "(d=" + std::to_string(e.depth) + ", i=" + std::to_string(e.from) +
         ", j=" + std::to_string(e.to) + ")";
}

Outcome checked_distill(PathEvaluator& ev, const Outcome& teacher, int size,
                        const EdgeContext& edge) {
  try {
    return ev.distill(teacher, size, edge);
  } catch (const std::exception& e) {
    throw EvaluationError("evaluator failed at edge " + edge_string(edge) +
                          ": " + e.what());
  }
}

Outcome checked_root(PathEvaluator& ev, int size) {
  try {
    return ev.root(size);
  } catch (const std::exception& e) {
    throw EvaluationError("evaluator failed at root: " + std::string(e.what()));
  }
}

void check_k(const SizeLadder& ladder, int k) {
  ladder.validate();
  if (k < 1 || static_cast<std::size_t>(k) > ladder.n()) {
    throw ParameterError("k must be in [1, " + std::to_string(ladder.n()) +
                         "], got " + std::to_string(k));
  }
}

// True when interior index sequence a is preferred over b on equal loss.
bool preferred(const std::vector<std::size_t>& a,
               const std::vector<std::size_t>& b) {
  for (std::size_t t = a.size(); t-- > 0;) {
    if (a[t] != b[t]) return a[t] < b[t];
  }
  return false;
}

Outcome with_accuracy(std::vector<int> path, double acc) {
  Outcome out;
  out.path = std::move(path);
  out.accuracy = acc;
  out.loss = 1.0 - acc;
  return out;
}

}  // namespace

void SizeLadder::validate() const {
  if (sizes.size() < 2) {
    throw LadderError("ladder needs a teacher and a student");
  }
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] >= sizes[i - 1]) {
      throw LadderError("ladder sizes must strictly decrease");
    }
  }
  if (sizes.back() < 1) throw LadderError("ladder sizes must be positive");
}

SizeLadder parse_ladder(std::string_view text) {
  SizeLadder ladder;
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || ptr != item.data() + item.size() || item.empty()) {
      throw LadderError("bad ladder entry '" + std::string(item) + "'");
    }
    ladder.sizes.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  ladder.validate();
  return ladder;
}

SurrogateEvaluator::SurrogateEvaluator(Params params)
    : params_(std::move(params)) {
  if (!(params_.beta >= 0.0 && params_.beta <= 1.0) ||
      !(params_.gamma >= 0.0)) {
    throw ParameterError("surrogate needs beta in [0,1] and gamma >= 0");
  }
}

SurrogateEvaluator SurrogateEvaluator::random(const SizeLadder& ladder,
                                              std::uint64_t seed) {
  ladder.validate();
  Rng rng = Rng::substream(seed, "surrogate");
  std::vector<double> acc(ladder.sizes.size());
  for (double& a : acc) a = rng.uniform(0.3, 0.95);
  std::sort(acc.begin(), acc.end(), std::greater<>());
  Params p;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    p.base[ladder.sizes[i]] = acc[i];
  }
  p.beta = rng.uniform(0.3, 0.9);
  p.gamma = rng.uniform(0.05, 1.0);
  return SurrogateEvaluator(std::move(p));
}

double SurrogateEvaluator::base(int size) const {
  const auto it = params_.base.find(size);
  if (it == params_.base.end()) {
    throw IndexError("surrogate has no base accuracy for size " +
                     std::to_string(size));
  }
  return it->second;
}

double SurrogateEvaluator::capacity(int size) const {
  const auto it = params_.capacity.find(size);
  return it == params_.capacity.end() ? static_cast<double>(size) : it->second;
}

double SurrogateEvaluator::transfer(double teacher_acc, int from_size,
                                    int to_size) const {
  const double b = base(to_size);
  const double gap = capacity(from_size) / capacity(to_size);
  const double acc = b + params_.beta * (teacher_acc - b) *
                             std::exp(-params_.gamma * (gap - 1.0));
  return std::clamp(acc, 0.0, 1.0);
}

Outcome SurrogateEvaluator::root(int teacher_size) {
  return with_accuracy({teacher_size}, base(teacher_size));
}

Outcome SurrogateEvaluator::distill(const Outcome& teacher, int target_size,
                                    const EdgeContext&) {
  std::vector<int> path = teacher.path;
  path.push_back(target_size);
  return with_accuracy(
      std::move(path),
      transfer(teacher.accuracy, teacher.path.back(), target_size));
}

TableEvaluator::TableEvaluator(std::map<std::vector<int>, double> accuracy)
    : accuracy_(std::move(accuracy)) {}

Outcome TableEvaluator::lookup(std::vector<int> path) const {
  const auto it = accuracy_.find(path);
  if (it == accuracy_.end()) {
    std::string s;
    for (int q : path) s += (s.empty() ? "" : "->") + std::to_string(q);
    throw IndexError("no tabulated accuracy for path " + s);
  }
  return with_accuracy(std::move(path), it->second);
}

Outcome TableEvaluator::root(int teacher_size) {
  return lookup({teacher_size});
}

Outcome TableEvaluator::distill(const Outcome& teacher, int target_size,
                                const EdgeContext&) {
  std::vector<int> path = teacher.path;
  path.push_back(target_size);
  return lookup(std::move(path));
}

TrainingEvaluator::TrainingEvaluator(
    std::map<int, zoo::NetworkSpec> specs, const harness::Dataset& data,
    distill::DistillConfig base, std::uint64_t root_seed,
    std::shared_ptr<const zoo::TrainedModel> teacher)
    : specs_(std::move(specs)),
      data_(data),
      base_(std::move(base)),
      root_seed_(root_seed),
      teacher_(std::move(teacher)) {
  base_.validate();
}

std::uint64_t TrainingEvaluator::edge_seed(std::uint64_t root_seed,
                                           const EdgeContext& e) {
  const std::uint64_t key = (static_cast<std::uint64_t>(e.depth) << 40) |
                            (static_cast<std::uint64_t>(e.from) << 20) |
                            static_cast<std::uint64_t>(e.to);
  return Rng::substream(root_seed, "edge", key).next();
}

Outcome TrainingEvaluator::root(int teacher_size) {
  if (teacher_ && teacher_->spec.size == teacher_size) {
    Outcome out = with_accuracy({teacher_size}, teacher_->metrics.test_acc);
    out.model = teacher_;
    return out;
  }
  return distill(Outcome{}, teacher_size, EdgeContext{0, 0, 0});
}

Outcome TrainingEvaluator::distill(const Outcome& teacher, int target_size,
                                   const EdgeContext& edge) {
  const auto spec = specs_.find(target_size);
  if (spec == specs_.end()) {
    throw IndexError("no network spec for size " + std::to_string(target_size));
  }
  std::vector<int> path = teacher.path;
  path.push_back(target_size);
  const std::uint64_t seed = edge_seed(root_seed_, edge);
  auto key = std::make_pair(path, seed);
  if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
  if (!teacher.path.empty() && !teacher.model) {
    throw UsageError("training evaluator needs a trained teacher model");
  }
  distill::DistillConfig cfg = base_;
  cfg.seed = seed;
  auto model = std::make_shared<zoo::TrainedModel>(
      distill::train(spec->second, data_, cfg, teacher.model.get()));
  ++trainings_;
  Outcome out = with_accuracy(std::move(path), model->metrics.test_acc);
  out.model = std::move(model);
  memo_.emplace(std::move(key), out);
  return out;
}

void ModelCache::put(int depth, std::size_t index, Entry entry) {
  const auto [it, inserted] =
      entries_.emplace(std::make_pair(depth, index), std::move(entry));
  if (!inserted) {
    throw UsageError("cache entry (" + std::to_string(depth) + ", " +
                     std::to_string(index) + ") written twice");
  }
}

const ModelCache::Entry* ModelCache::get(int depth, std::size_t index) const {
  const auto it = entries_.find({depth, index});
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::vector<int>> enumerate_paths(const SizeLadder& ladder) {
  ladder.validate();
  const std::size_t interior = ladder.n() - 1;
  if (interior >= 31) throw BudgetError("too many ladder sizes to enumerate");
  std::vector<std::vector<int>> paths;
  paths.reserve(std::size_t{1} << interior);
  for (std::size_t mask = 0; mask < (std::size_t{1} << interior); ++mask) {
    std::vector<int> path{ladder.teacher()};
    for (std::size_t b = 0; b < interior; ++b) {
      if (mask >> b & 1) path.push_back(ladder.sizes[b + 1]);
    }
    path.push_back(ladder.student());
    paths.push_back(std::move(path));
  }
  return paths;
}

std::vector<int> full_path(const SizeLadder& ladder) {
  ladder.validate();
  return ladder.sizes;
}

PlanResult dp_optimal_path(const SizeLadder& ladder, int k,
                           PathEvaluator& evaluator, ModelCache& cache) {
  check_k(ladder, k);
  const std::size_t n = ladder.n();
  PlanResult result;
  auto record = [&](const EdgeContext& e, const Outcome& from,
                    const Outcome& to) {
    ++result.evaluator_calls;
    result.edges.push_back(
        {e, from.path, to.path.back(), to.accuracy, to.loss});
  };

  // States that cannot reach S in exactly the remaining steps are skipped:
  // at depth d < k only d <= j <= n - (k - d), at depth k only j = n.
  const auto first_j = [&](int d) {
    return d == k ? n : static_cast<std::size_t>(d);
  };
  const auto last_j = [&](int d) {
    return d == k ? n : n - static_cast<std::size_t>(k - d);
  };
  const Outcome root = checked_root(evaluator, ladder.teacher());
  for (std::size_t i = first_j(1); i <= last_j(1); ++i) {
    const EdgeContext e{1, 0, i};
    Outcome w = checked_distill(evaluator, root, ladder.sizes[i], e);
    record(e, root, w);
    cache.put(1, i, {std::move(w), 0});
  }
  for (int d = 2; d <= k; ++d) {
    for (std::size_t j = first_j(d); j <= last_j(d); ++j) {
      std::optional<ModelCache::Entry> best;
      for (std::size_t i = 1; i < j; ++i) {
        const ModelCache::Entry* prev = cache.get(d - 1, i);
        if (prev == nullptr) continue;
        const EdgeContext e{d, i, j};
        Outcome w =
            checked_distill(evaluator, prev->outcome, ladder.sizes[j], e);
        record(e, prev->outcome, w);
        if (!best || w.loss < best->outcome.loss) {
          best = ModelCache::Entry{std::move(w), i};
        }
      }
      if (best) cache.put(d, j, std::move(*best));
    }
  }
  const ModelCache::Entry* final_entry = cache.get(k, n);
  if (final_entry == nullptr) {
    throw UsageError("no length-" + std::to_string(k) + " path reaches S");
  }
  result.best = final_entry->outcome;
  result.path = result.best.path;
  return result;
}

PlanResult brute_force_optimal_path(const SizeLadder& ladder, int k,
                                    PathEvaluator& evaluator,
                                    std::size_t max_paths) {
  check_k(ladder, k);
  const std::size_t n = ladder.n();
  const std::size_t choose = static_cast<std::size_t>(k) - 1;
  // C(n-1, k-1) without overflow for any ladder that fits in memory.
  double count = 1.0;
  for (std::size_t t = 0; t < choose; ++t) {
    count = count * static_cast<double>(n - 1 - t) / static_cast<double>(t + 1);
  }
  if (count > static_cast<double>(max_paths)) {
    throw BudgetError("brute force would evaluate " +
                      std::to_string(static_cast<long double>(count)) +
                      " paths, cap is " + std::to_string(max_paths));
  }

  PlanResult result;
  const Outcome root = checked_root(evaluator, ladder.teacher());
  std::vector<std::size_t> pick(choose);
  for (std::size_t t = 0; t < choose; ++t) pick[t] = t + 1;
  std::vector<std::size_t> best_pick;
  bool have_best = false;
  while (true) {
    Outcome cur = root;
    std::size_t from = 0;
    for (std::size_t t = 0; t <= choose; ++t) {
      const std::size_t to = t < choose ? pick[t] : n;
      const EdgeContext e{static_cast<int>(t + 1), from, to};
      Outcome next = checked_distill(evaluator, cur, ladder.sizes[to], e);
      ++result.evaluator_calls;
      result.edges.push_back(
          {e, cur.path, next.path.back(), next.accuracy, next.loss});
      cur = std::move(next);
      from = to;
    }
    if (!have_best || cur.loss < result.best.loss ||
        (cur.loss == result.best.loss && preferred(pick, best_pick))) {
      result.best = std::move(cur);
      best_pick = pick;
      have_best = true;
    }
    // Next combination of `choose` indices from 1..n-1.
    std::size_t t = choose;
    while (t > 0 && pick[t - 1] == n - 1 - (choose - t)) --t;
    if (t == 0) break;
    ++pick[t - 1];
    for (std::size_t u = t; u < choose; ++u) pick[u] = pick[u - 1] + 1;
  }
  result.path = result.best.path;
  return result;
}

int suggest_ta_size(const SizeLadder& ladder,
                    const std::map<int, double>& scratch_accuracy) {
  ladder.validate();
  if (ladder.n() < 2) throw LadderError("ladder has no interior sizes");
  auto acc = [&](int size) {
    const auto it = scratch_accuracy.find(size);
    if (it == scratch_accuracy.end()) {
      throw ParameterError("missing scratch accuracy for size " +
                           std::to_string(size));
    }
    return it->second;
  };
  const double target = 0.5 * (acc(ladder.teacher()) + acc(ladder.student()));
  int best = 0;
  double best_dist = 0.0;
  // Ascending sizes so that the first minimum is the smallest size.
  for (std::size_t i = ladder.n() - 1; i >= 1; --i) {
    const double dist = std::abs(acc(ladder.sizes[i]) - target);
    if (best == 0 || dist < best_dist) {
      best = ladder.sizes[i];
      best_dist = dist;
    }
  }
  return best;
}

nlohmann::json to_json(const PlanResult& result, const SizeLadder& ladder,
                       int k) {
  nlohmann::json edges = nlohmann::json::array();
  for (const EdgeRecord& e : result.edges) {
    edges.push_back({{"depth", e.edge.depth},
                     {"from", e.edge.from},
                     {"to", e.edge.to},
                     {"teacher_path", e.teacher_path},
                     {"target", e.target},
                     {"accuracy", e.accuracy},
                     {"loss", e.loss}});
  }
  return {
      {"ladder", ladder.sizes},   {"k", k},
      {"path", result.path},      {"accuracy", result.best.accuracy},
      {"loss", result.best.loss}, {"evaluator_calls", result.evaluator_calls},
      {"edges", std::move(edges)}};
}

nlohmann::json path_graph_json(const SizeLadder& ladder,
                               PathEvaluator& evaluator) {
  ladder.validate();
  nlohmann::json nodes = nlohmann::json::array();
  nlohmann::json adjacency = nlohmann::json::object();
  struct Frame {
    Outcome outcome;
    std::size_t index;
    std::size_t id;
  };
  std::size_t next_id = 0;
  auto add_node = [&](const Outcome& o) {
    const std::size_t id = next_id++;
    nodes.push_back({{"id", id},
                     {"path", o.path},
                     {"size", o.path.back()},
                     {"accuracy", o.accuracy}});
    adjacency[std::to_string(id)] = nlohmann::json::array();
    return id;
  };
  std::vector<Frame> stack;
  Outcome root = checked_root(evaluator, ladder.teacher());
  const std::size_t root_id = add_node(root);
  stack.push_back({std::move(root), 0, root_id});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    std::vector<Frame> children;
    for (std::size_t j = f.index + 1; j <= ladder.n(); ++j) {
      const EdgeContext e{static_cast<int>(f.outcome.path.size()), f.index, j};
      Outcome child = checked_distill(evaluator, f.outcome, ladder.sizes[j], e);
      const std::size_t id = add_node(child);
      adjacency[std::to_string(f.id)].push_back(id);
      children.push_back({std::move(child), j, id});
    }
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      stack.push_back(std::move(*it));
    }
  }
  return {{"ladder", ladder.sizes},
          {"nodes", std::move(nodes)},
          {"adjacency", std::move(adjacency)}};
}

}  // namespace takd::planner
