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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "takd/errors.hpp"
#include "takd/rng.hpp"

namespace takd::planner {
namespace {

SizeLadder Ladder(std::vector<int> sizes) {
  return SizeLadder{std::move(sizes)};
}

// Ladder of n + 1 sizes 2(n + 1), 2n, ..., 2.
SizeLadder EvenLadder(std::size_t n) {
  SizeLadder l;
  for (std::size_t i = 0; i <= n; ++i) {
    l.sizes.push_back(static_cast<int>(2 * (n + 1 - i)));
  }
  return l;
}

std::size_t IndexOf(const SizeLadder& l, int size) {
  return static_cast<std::size_t>(
      std::find(l.sizes.begin(), l.sizes.end(), size) - l.sizes.begin());
}

// Evaluates a whole path end to end, one edge after another.
Outcome EvaluatePath(PathEvaluator& ev, const SizeLadder& l,
                     const std::vector<int>& path) {
  Outcome cur = ev.root(path.front());
  for (std::size_t t = 1; t < path.size(); ++t) {
    cur = ev.distill(
        cur, path[t],
        {static_cast<int>(t), IndexOf(l, path[t - 1]), IndexOf(l, path[t])});
  }
  return cur;
}

double Binomial(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t t = 0; t < k; ++t) c = c * double(n - t) / double(t + 1);
  return c;
}

// Checks, at every accuracy some path prefix actually reaches, that
// inserting an assistant never hurts and distillation never loses to
// scratch training.
bool SatisfiesPrinciples(const SurrogateEvaluator& ev, const SizeLadder& l) {
  const auto& base = ev.params().base;
  std::vector<std::pair<int, double>> frontier{
      {l.teacher(), base.at(l.teacher())}};
  std::vector<std::pair<int, double>> realized = frontier;
  while (!frontier.empty()) {
    std::vector<std::pair<int, double>> next;
    for (const auto& [p, a] : frontier) {
      for (int q : l.sizes) {
        if (q >= p) continue;
        next.push_back({q, ev.transfer(a, p, q)});
      }
    }
    realized.insert(realized.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  for (const auto& [p, a] : realized) {
    for (int m : l.sizes) {
      if (m >= p) continue;
      for (int q : l.sizes) {
        if (q >= m) continue;
        if (ev.transfer(a, p, q) < base.at(q)) return false;
        if (ev.transfer(ev.transfer(a, p, m), m, q) < ev.transfer(a, p, q)) {
          return false;
        }
      }
    }
  }
  return true;
}

TEST(SizeLadderTest, Validation) {
  EXPECT_NO_THROW(Ladder({10, 2}).validate());
  EXPECT_THROW(Ladder({10}).validate(), LadderError);
  EXPECT_THROW(Ladder({10, 10}).validate(), LadderError);
  EXPECT_THROW(Ladder({2, 10}).validate(), LadderError);
  EXPECT_THROW(Ladder({4, 0}).validate(), LadderError);
  EXPECT_EQ(parse_ladder("10,8,6,4,2").sizes,
            (std::vector<int>{10, 8, 6, 4, 2}));
  EXPECT_EQ(parse_ladder(" 10 , 2 ").n(), 1u);
  EXPECT_THROW(parse_ladder("10,x"), LadderError);
  EXPECT_THROW(parse_ladder("4,6"), LadderError);
}

TEST(EnumeratePathsTest, NoInteriorNodes) {
  const auto paths = enumerate_paths(Ladder({10, 2}));
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0], (std::vector<int>{10, 2}));
}

TEST(EnumeratePathsTest, EvenLadder) {
  const auto paths = enumerate_paths(Ladder({10, 8, 6, 4, 2}));
  ASSERT_EQ(paths.size(), 8u);
  EXPECT_EQ(paths.front(), (std::vector<int>{10, 2}));
  EXPECT_EQ(paths.back(), (std::vector<int>{10, 8, 6, 4, 2}));
  EXPECT_EQ(paths[1], (std::vector<int>{10, 8, 2}));
  EXPECT_EQ(paths[2], (std::vector<int>{10, 6, 2}));
}

TEST(EnumeratePathsTest, CountsAndShape) {
  for (std::size_t n = 1; n <= 10; ++n) {
    const SizeLadder l = EvenLadder(n);
    const auto paths = enumerate_paths(l);
    EXPECT_EQ(paths.size(), std::size_t{1} << (n - 1));
    std::set<std::vector<int>> unique(paths.begin(), paths.end());
    EXPECT_EQ(unique.size(), paths.size());
    for (const auto& p : paths) {
      EXPECT_EQ(p.front(), l.teacher());
      EXPECT_EQ(p.back(), l.student());
      EXPECT_TRUE(std::is_sorted(p.rbegin(), p.rend()));
      EXPECT_TRUE(std::adjacent_find(p.begin(), p.end()) == p.end());
    }
  }
}

TEST(FullPathTest, IsTheLadder) {
  EXPECT_EQ(full_path(Ladder({10, 8, 6, 4, 2})),
            (std::vector<int>{10, 8, 6, 4, 2}));
  EXPECT_EQ(full_path(Ladder({10, 2})), (std::vector<int>{10, 2}));
}

TEST(FullPathTest, OptimalUnderPrinciples) {
  int admitted = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const SizeLadder l = EvenLadder(3 + seed % 4);
    SurrogateEvaluator ev = SurrogateEvaluator::random(l, seed);
    if (!SatisfiesPrinciples(ev, l)) continue;
    ++admitted;
    const double full = EvaluatePath(ev, l, full_path(l)).accuracy;
    for (const auto& p : enumerate_paths(l)) {
      EXPECT_GE(full, EvaluatePath(ev, l, p).accuracy) << "seed " << seed;
    }
  }
  EXPECT_GE(admitted, 20);
}

TEST(SurrogateTest, FormulaAndPurity) {
  SurrogateEvaluator ev({{{10, 0.9}, {4, 0.6}, {2, 0.5}}, {}, 0.6, 0.3});
  const double expected =
      0.6 + 0.6 * (0.9 - 0.6) * std::exp(-0.3 * (10.0 / 4.0 - 1.0));
  EXPECT_NEAR(ev.transfer(0.9, 10, 4), expected, 1e-15);
  const Outcome r = ev.root(10);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.9);
  const Outcome a = ev.distill(r, 4, {1, 0, 1});
  const Outcome b = ev.distill(r, 4, {1, 0, 1});
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.path, (std::vector<int>{10, 4}));
  EXPECT_DOUBLE_EQ(a.loss, 1.0 - a.accuracy);
  EXPECT_EQ(ev.transfer(5.0, 10, 4), 1.0);
}

TEST(DpTest, SingleStep) {
  const SizeLadder l = Ladder({10, 8, 6, 4, 2});
  SurrogateEvaluator ev = SurrogateEvaluator::random(l, 3);
  ModelCache cache;
  const PlanResult r = dp_optimal_path(l, 1, ev, cache);
  EXPECT_EQ(r.path, (std::vector<int>{10, 2}));
  EXPECT_EQ(r.best.accuracy, EvaluatePath(ev, l, {10, 2}).accuracy);
  const PlanResult bf = brute_force_optimal_path(l, 1, ev);
  EXPECT_EQ(bf.path, (std::vector<int>{10, 2}));
  EXPECT_EQ(bf.evaluator_calls, 1u);
}

TEST(DpTest, KOutOfRange) {
  const SizeLadder l = Ladder({10, 8, 6, 4, 2});
  SurrogateEvaluator ev = SurrogateEvaluator::random(l, 1);
  ModelCache c1, c2;
  EXPECT_THROW(dp_optimal_path(l, 5, ev, c1), ParameterError);
  EXPECT_THROW(dp_optimal_path(l, 0, ev, c2), ParameterError);
  EXPECT_THROW(brute_force_optimal_path(l, 5, ev), ParameterError);
}

TEST(DpTest, AgreesWithBruteForce) {
  for (std::size_t n = 3; n <= 7; ++n) {
    const SizeLadder l = EvenLadder(n);
    for (int k = 1; k <= static_cast<int>(n); ++k) {
      for (std::uint64_t s = 0; s < 50; ++s) {
        SurrogateEvaluator ev = SurrogateEvaluator::random(l, 1000 * n + s);
        ModelCache cache;
        const PlanResult dp = dp_optimal_path(l, k, ev, cache);
        const PlanResult bf = brute_force_optimal_path(l, k, ev);
        ASSERT_EQ(dp.best.loss, bf.best.loss) << "n=" << n << " k=" << k;
        ASSERT_EQ(dp.path, bf.path) << "n=" << n << " k=" << k;
        EXPECT_EQ(dp.path.size(), static_cast<std::size_t>(k) + 1);
      }
    }
  }
}

TEST(DpTest, SixRungsThreeSteps) {
  const SizeLadder l = EvenLadder(6);
  SurrogateEvaluator ev = SurrogateEvaluator::random(l, 77);
  ModelCache cache;
  EXPECT_EQ(dp_optimal_path(l, 3, ev, cache).path,
            brute_force_optimal_path(l, 3, ev).path);
}

TEST(DpTest, CallCountBound) {
  for (std::size_t n = 1; n <= 9; ++n) {
    const SizeLadder l = EvenLadder(n);
    for (int k = 1; k <= static_cast<int>(n); ++k) {
      SurrogateEvaluator inner = SurrogateEvaluator::random(l, n);
      CountingEvaluator ev(inner);
      ModelCache cache;
      const PlanResult r = dp_optimal_path(l, k, ev, cache);
      EXPECT_EQ(r.evaluator_calls, ev.calls());
      EXPECT_LE(ev.calls(), n + (k - 1) * n * (n - 1) / 2);
      CountingEvaluator bf_ev(inner);
      const PlanResult bf = brute_force_optimal_path(l, k, bf_ev);
      const double paths = Binomial(n - 1, k - 1);
      EXPECT_EQ(static_cast<double>(bf_ev.calls()), paths * k);
      if (k >= 2 && n >= 5 && paths > static_cast<double>(n)) {
        EXPECT_LT(ev.calls(), bf_ev.calls()) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(DpTest, OptimalSubstructureFromCache) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SizeLadder l = EvenLadder(6);
    SurrogateEvaluator ev = SurrogateEvaluator::random(l, s);
    for (int k = 2; k <= 6; ++k) {
      ModelCache cache;
      const PlanResult r = dp_optimal_path(l, k, ev, cache);
      const ModelCache::Entry* last = cache.get(k, l.n());
      ASSERT_NE(last, nullptr);
      const ModelCache::Entry* prev = cache.get(k - 1, last->predecessor);
      ASSERT_NE(prev, nullptr);
      const std::vector<int> prefix(r.path.begin(), r.path.end() - 1);
      EXPECT_EQ(prefix, prev->outcome.path);
      for (int d = 1; d <= k; ++d) {
        for (std::size_t j = 1; j <= l.n(); ++j) {
          const ModelCache::Entry* e = cache.get(d, j);
          if (e == nullptr) continue;
          EXPECT_EQ(e->outcome.path.size(), static_cast<std::size_t>(d) + 1);
          EXPECT_EQ(e->outcome.path.back(), l.sizes[j]);
        }
      }
    }
  }
}

TEST(ModelCacheTest, WriteOnce) {
  ModelCache cache;
  cache.put(1, 2, {});
  EXPECT_THROW(cache.put(1, 2, {}), UsageError);
  EXPECT_NO_THROW(cache.put(2, 2, {}));
  EXPECT_EQ(cache.size(), 2u);
  EXPECT_EQ(cache.get(3, 2), nullptr);
}

class FailingEvaluator : public PathEvaluator {
 public:
  explicit FailingEvaluator(PathEvaluator& inner) : inner_(inner) {}
  Outcome root(int size) override { return inner_.root(size); }
  Outcome distill(const Outcome& t, int size, const EdgeContext& e) override {
    if (e.depth == 2 && e.from == 1 && e.to == 4)
      throw NumericError("diverged");
    return inner_.distill(t, size, e);
  }

 private:
  PathEvaluator& inner_;
};

TEST(DpTest, EvaluatorFailureCarriesContext) {
  const SizeLadder l = Ladder({10, 8, 6, 4, 2});
  SurrogateEvaluator inner = SurrogateEvaluator::random(l, 5);
  FailingEvaluator ev(inner);
  ModelCache cache;
  try {
    dp_optimal_path(l, 2, ev, cache);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("d=2"), std::string::npos) << what;
    EXPECT_NE(what.find("i=1"), std::string::npos) << what;
    EXPECT_NE(what.find("j=4"), std::string::npos) << what;
    EXPECT_NE(what.find("diverged"), std::string::npos) << what;
  }
}

TEST(BruteForceTest, BudgetCap) {
  const SizeLadder l = EvenLadder(12);
  SurrogateEvaluator ev = SurrogateEvaluator::random(l, 1);
  EXPECT_THROW(brute_force_optimal_path(l, 6, ev, 100), BudgetError);
  EXPECT_NO_THROW(brute_force_optimal_path(l, 2, ev, 100));
}

TEST(BruteForceTest, TiesPreferDpChoice) {
  // Every path has the same accuracy; both searches keep the largest TAs
  // nearest the student.
  std::map<std::vector<int>, double> table;
  for (const auto& p : enumerate_paths(Ladder({10, 8, 6, 4, 2}))) {
    for (std::size_t len = 1; len <= p.size(); ++len) {
      table[std::vector<int>(p.begin(), p.begin() + len)] = 0.5;
    }
  }
  for (int a : {8, 6, 4}) table[{10, a, 2}] = 0.5;
  TableEvaluator ev(table);
  const SizeLadder l = Ladder({10, 8, 6, 4, 2});
  ModelCache cache;
  const PlanResult dp = dp_optimal_path(l, 2, ev, cache);
  const PlanResult bf = brute_force_optimal_path(l, 2, ev);
  EXPECT_EQ(dp.path, (std::vector<int>{10, 8, 2}));
  EXPECT_EQ(bf.path, dp.path);
}

// Every prefix of every decreasing path from 10 over {8, 6, 4, 2}, with
// accuracies shaped like a CIFAR-100 path graph: among the two-assistant
// paths 10 -> 6 -> 4 -> 2 is best, and 10 -> 6 -> 4 is the best
// one-assistant path to 4.
std::map<std::vector<int>, double> PathGraphTable() {
  std::map<std::vector<int>, double> t;
  std::vector<std::vector<int>> frontier{{10}};
  t[{10}] = 0.5580;
  while (!frontier.empty()) {
    std::vector<std::vector<int>> next;
    for (const auto& p : frontier) {
      for (int q : {8, 6, 4, 2}) {
        if (q >= p.back()) continue;
        auto c = p;
        c.push_back(q);
        t[c] = 0.30 + 0.025 * q + 0.002 * static_cast<double>(c.size());
        next.push_back(c);
      }
    }
    frontier = std::move(next);
  }
  t[{10, 8, 4}] = 0.4900;
  t[{10, 6, 4}] = 0.4950;
  t[{10, 8, 6, 2}] = 0.4390;
  t[{10, 8, 4, 2}] = 0.4410;
  t[{10, 6, 4, 2}] = 0.4450;
  return t;
}

TEST(TableEvaluatorTest, PathGraphBestTwoAssistantPath) {
  const SizeLadder l = Ladder({10, 8, 6, 4, 2});
  TableEvaluator ev(PathGraphTable());
  ModelCache cache;
  const PlanResult dp = dp_optimal_path(l, 3, ev, cache);
  EXPECT_EQ(dp.path, (std::vector<int>{10, 6, 4, 2}));
  EXPECT_EQ(brute_force_optimal_path(l, 3, ev).path, dp.path);
  const ModelCache::Entry* to4 = cache.get(2, 3);
  ASSERT_NE(to4, nullptr);
  EXPECT_EQ(to4->outcome.path, (std::vector<int>{10, 6, 4}));
}

TEST(TableEvaluatorTest, MissingPath) {
  TableEvaluator ev(std::map<std::vector<int>, double>{{{10}, 0.9}});
  const Outcome r = ev.root(10);
  EXPECT_THROW(ev.distill(r, 4, {1, 0, 1}), IndexError);
  EXPECT_THROW(ev.root(8), IndexError);
}

TEST(SuggestTaTest, SaturatingScratchCurve) {
  // Scratch accuracy saturates with depth, so the accuracy midpoint sits
  // at a small network.
  const std::map<int, double> acc{
      {10, 0.58}, {8, 0.57}, {6, 0.55}, {4, 0.51}, {2, 0.40}};
  EXPECT_EQ(suggest_ta_size(Ladder({10, 8, 6, 4, 2}), acc), 4);
}

TEST(SuggestTaTest, ExactMidpoint) {
  EXPECT_EQ(
      suggest_ta_size(Ladder({10, 6, 2}), {{10, 0.9}, {6, 0.7}, {2, 0.5}}), 6);
}

TEST(SuggestTaTest, TiesGoSmall) {
  const std::map<int, double> acc{
      {10, 0.5}, {8, 0.5}, {6, 0.5}, {4, 0.5}, {2, 0.5}};
  EXPECT_EQ(suggest_ta_size(Ladder({10, 8, 6, 4, 2}), acc), 4);
}

TEST(SuggestTaTest, Errors) {
  EXPECT_THROW(suggest_ta_size(Ladder({10, 2}), {{10, 0.9}, {2, 0.5}}),
               LadderError);
  EXPECT_THROW(suggest_ta_size(Ladder({10, 6, 2}), {{10, 0.9}, {2, 0.5}}),
               ParameterError);
}

TEST(ExportTest, PlanJson) {
  const SizeLadder l = Ladder({10, 8, 6, 4, 2});
  SurrogateEvaluator ev = SurrogateEvaluator::random(l, 2);
  ModelCache cache;
  const PlanResult r = dp_optimal_path(l, 2, ev, cache);
  const auto j = to_json(r, l, 2);
  EXPECT_EQ(j.at("k").get<int>(), 2);
  EXPECT_EQ(j.at("path").get<std::vector<int>>(), r.path);
  EXPECT_EQ(j.at("evaluator_calls").get<std::size_t>(), r.evaluator_calls);
  EXPECT_EQ(j.at("edges").size(), r.edges.size());
}

TEST(ExportTest, PathGraph) {
  const SizeLadder l = Ladder({10, 8, 6, 4, 2});
  TableEvaluator ev(PathGraphTable());
  const auto g = path_graph_json(l, ev);
  // One node per decreasing sequence starting at 10: 2^4.
  EXPECT_EQ(g.at("nodes").size(), 16u);
  std::size_t edges = 0;
  for (const auto& [id, out] : g.at("adjacency").items()) edges += out.size();
  EXPECT_EQ(edges, 15u);
}

TEST(TrainingEvaluatorTest, EdgeSeedsDiffer) {
  const auto a = TrainingEvaluator::edge_seed(1, {1, 0, 2});
  EXPECT_EQ(a, TrainingEvaluator::edge_seed(1, {1, 0, 2}));
  EXPECT_NE(a, TrainingEvaluator::edge_seed(1, {2, 0, 2}));
  EXPECT_NE(a, TrainingEvaluator::edge_seed(1, {1, 1, 2}));
  EXPECT_NE(a, TrainingEvaluator::edge_seed(2, {1, 0, 2}));
}

}  // namespace
}  // namespace takd::planner
