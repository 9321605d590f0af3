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

#include <gtest/gtest.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "takd/dataset.hpp"
#include "takd/distill.hpp"
#include "takd/errors.hpp"
#include "takd/experiments.hpp"
#include "takd/network.hpp"
#include "takd/records.hpp"
#include "takd/rng.hpp"
#include "takd/search.hpp"

namespace takd::harness {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("takd_harness_" + name + "_" +
                                                  std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void WriteBytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
}

IdxImages TwoImages() {
  IdxImages im;
  im.count = 2;
  im.rows = 2;
  im.cols = 2;
  im.pixels = {0, 64, 128, 255, 10, 20, 30, 40};
  return im;
}

distill::DistillConfig Quick(std::uint64_t seed = 0, int epochs = 4) {
  distill::DistillConfig c = desk_distill_config(seed);
  c.epochs = epochs;
  c.batch_size = 32;
  c.optimizer.schedule.clear();
  return c;
}

TEST(IdxTest, HeaderBytes) {
  const auto bytes = encode_idx_images(TwoImages());
  ASSERT_GE(bytes.size(), 16u);
  EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 4),
            (std::vector<std::uint8_t>{0x00, 0x00, 0x08, 0x03}));
  EXPECT_NO_THROW(parse_idx_images(bytes));
  const std::vector<std::uint8_t> labels{1, 0};
  const auto lb = encode_idx_labels(labels);
  EXPECT_EQ(std::vector<std::uint8_t>(lb.begin(), lb.begin() + 4),
            (std::vector<std::uint8_t>{0x00, 0x00, 0x08, 0x01}));
  auto wrong = bytes;
  wrong[3] = 0x01;
  EXPECT_THROW(parse_idx_images(wrong), FormatError);
  EXPECT_THROW(parse_idx_images(lb), FormatError);
}

TEST(IdxTest, FileRoundTrip) {
  const fs::path dir = TempDir("idx");
  const IdxImages im = TwoImages();
  const std::vector<std::uint8_t> labels{1, 0};
  WriteBytes(dir / "img.idx", encode_idx_images(im));
  WriteBytes(dir / "lbl.idx", encode_idx_labels(labels));
  const IdxImages back = read_idx_images(dir / "img.idx");
  EXPECT_EQ(back.count, 2u);
  EXPECT_EQ(back.rows, 2u);
  EXPECT_EQ(back.cols, 2u);
  EXPECT_EQ(back.pixels, im.pixels);
  EXPECT_EQ(read_idx_labels(dir / "lbl.idx"), labels);

  const Dataset ds = load_idx(dir / "img.idx", dir / "lbl.idx");
  ASSERT_EQ(ds.train.size(), 2u);
  EXPECT_EQ(ds.train.features.shape(), (ad::Shape{2, 1, 2, 2}));
  EXPECT_EQ(ds.train.labels, (std::vector<int>{1, 0}));
  double mean = 0.0;
  for (std::uint8_t p : im.pixels) mean += p / 255.0;
  mean /= 8;
  double var = 0.0;
  for (std::uint8_t p : im.pixels)
    var += (p / 255.0 - mean) * (p / 255.0 - mean);
  const double scale = 0.5 / std::sqrt(var / 8);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(ds.train.features.data()[i],
                (im.pixels[i] / 255.0 - mean) * scale, 1e-6);
  }
  fs::remove_all(dir);
}

TEST(IdxTest, CountMismatch) {
  const fs::path dir = TempDir("mismatch");
  WriteBytes(dir / "img.idx", encode_idx_images(TwoImages()));
  const std::vector<std::uint8_t> three{1, 0, 1};
  WriteBytes(dir / "lbl.idx", encode_idx_labels(three));
  EXPECT_THROW(load_idx(dir / "img.idx", dir / "lbl.idx"), FormatError);
  EXPECT_THROW(load_idx(dir / "missing.idx", dir / "lbl.idx"), FormatError);
  fs::remove_all(dir);
}

TEST(IdxTest, SeededCorruptionsAreRejected) {
  IdxImages im;
  im.count = 3;
  im.rows = 4;
  im.cols = 5;
  for (std::size_t i = 0; i < 60; ++i)
    im.pixels.push_back(static_cast<std::uint8_t>(i * 4));
  const auto good = encode_idx_images(im);
  const std::vector<std::uint8_t> labels{0, 1, 2};
  const auto good_labels = encode_idx_labels(labels);
  Rng rng(99);
  int rejected = 0;
  for (int t = 0; t < 100; ++t) {
    const bool label_file = t % 4 == 3;
    auto b = label_file ? good_labels : good;
    const std::size_t header = label_file ? 8 : 16;
    switch (rng.next() % 4) {
      case 0: {  // magic
        const std::size_t at = rng.next() % 4;
        b[at] = static_cast<std::uint8_t>(b[at] ^ (1 + rng.next() % 255));
        break;
      }
      case 1: {  // one dimension field grows or shrinks
        const std::size_t field = 1 + rng.next() % (header / 4 - 1);
        const std::size_t at = field * 4 + 3;
        b[at] = static_cast<std::uint8_t>(b[at] + 1 + rng.next() % 200);
        break;
      }
      case 2:  // truncation
        b.resize(rng.next() % b.size());
        break;
      default:  // trailing bytes
        b.resize(b.size() + 1 + rng.next() % 16, 7);
        break;
    }
    try {
      if (label_file) {
        parse_idx_labels(b);
      } else {
        parse_idx_images(b);
      }
    } catch (const FormatError&) {
      ++rejected;
    }
  }
  EXPECT_EQ(rejected, 100);
}

TEST(SyntheticTest, Deterministic) {
  for (auto kind : {SyntheticKind::kBlobs, SyntheticKind::kSpirals}) {
    const Dataset a = gen_synthetic(kind, 300, 3, 0.2, 7);
    const Dataset b = gen_synthetic(kind, 300, 3, 0.2, 7);
    const Dataset c = gen_synthetic(kind, 300, 3, 0.2, 8);
    EXPECT_TRUE(ad::bit_equal(a.train.features, b.train.features));
    EXPECT_EQ(a.train.labels, b.train.labels);
    EXPECT_TRUE(ad::bit_equal(a.test.features, b.test.features));
    EXPECT_FALSE(ad::bit_equal(a.train.features, c.train.features));
    EXPECT_EQ(a.train.size(), 240u);
    EXPECT_EQ(a.test.size(), 60u);
    EXPECT_NO_THROW(a.validate());
  }
  EXPECT_THROW(gen_synthetic(SyntheticKind::kBlobs, 20, 3, 0.1, 0),
               ParameterError);
  EXPECT_THROW(parse_synthetic_kind("moons"), ConfigError);
}

TEST(SyntheticTest, NoiselessBlobsAreLinearlySeparable) {
  const Dataset d = gen_synthetic(SyntheticKind::kBlobs, 400, 4, 0.0, 3);
  // Nearest class mean is a linear rule; every point sits on its mean.
  std::vector<std::array<double, 2>> mean(4, {0.0, 0.0});
  std::vector<int> count(4, 0);
  for (std::size_t i = 0; i < d.train.size(); ++i) {
    const int c = d.train.labels[i];
    mean[c][0] += d.train.features.data()[2 * i];
    mean[c][1] += d.train.features.data()[2 * i + 1];
    ++count[c];
  }
  for (int c = 0; c < 4; ++c) {
    mean[c][0] /= count[c];
    mean[c][1] /= count[c];
  }
  for (const Split* s : {&d.train, &d.test}) {
    for (std::size_t i = 0; i < s->size(); ++i) {
      const double x = s->features.data()[2 * i],
                   y = s->features.data()[2 * i + 1];
      int best = 0;
      double best_score = -1e300;
      for (int c = 0; c < 4; ++c) {
        const double score =
            x * mean[c][0] + y * mean[c][1] -
            0.5 * (mean[c][0] * mean[c][0] + mean[c][1] * mean[c][1]);
        if (score > best_score) best_score = score, best = c;
      }
      EXPECT_EQ(best, s->labels[i]);
    }
  }
  const auto probe =
      distill::train(zoo::make_mlp(0, 1, 2, 4, false), d, Quick(0, 20));
  EXPECT_EQ(probe.metrics.test_acc, 1.0);
}

TEST(SyntheticTest, DeeperMlpBeatsShallowOnSpirals) {
  const Dataset d = gen_synthetic(SyntheticKind::kSpirals, 3000, 3, 0.2, 0);
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    distill::DistillConfig cfg = desk_distill_config(seed);
    cfg.epochs = 30;
    cfg.optimizer.schedule = {{15, 0.01}, {23, 0.001}};
    const auto big = distill::train(zoo::make_mlp(3, 32, 2, 3, true), d, cfg);
    const auto small = distill::train(zoo::make_mlp(1, 32, 2, 3, true), d, cfg);
    wins += big.metrics.test_acc > small.metrics.test_acc;
  }
  EXPECT_GE(wins, 3);
}

TEST(SplitTest, MovesRequestedFraction) {
  const fs::path dir = TempDir("split");
  IdxImages im;
  im.count = 50;
  im.rows = im.cols = 2;
  im.pixels.resize(200);
  for (std::size_t i = 0; i < 200; ++i)
    im.pixels[i] = static_cast<std::uint8_t>(i);
  std::vector<std::uint8_t> labels(50);
  for (std::size_t i = 0; i < 50; ++i)
    labels[i] = static_cast<std::uint8_t>(i % 5);
  Dataset ds = dataset_from_idx(im, labels);
  split_train_test(ds, 0.2, 1);
  EXPECT_EQ(ds.train.size(), 40u);
  EXPECT_EQ(ds.test.size(), 10u);
  EXPECT_THROW(split_train_test(ds, 1.0, 1), ParameterError);
  fs::remove_all(dir);
}

TEST(SearchTest, ExhaustiveWhenBudgetCoversGrid) {
  const SearchSpace space;
  std::set<std::pair<double, double>> seen;
  const auto r = hyper_search(
      space, 100, Quick(),
      [&](const distill::DistillConfig& c) {
        seen.insert({c.temperature, c.lambda});
        return c.temperature == 8 && c.lambda == 0.75 ? 1.0 : 0.0;
      },
      3);
  EXPECT_EQ(r.trials.size(), 30u);
  EXPECT_EQ(seen.size(), 30u);
  EXPECT_EQ(r.best.temperature, 8);
  EXPECT_EQ(r.best.lambda, 0.75);
  EXPECT_EQ(r.best.epochs, Quick().epochs);
}

TEST(SearchTest, SingleTrial) {
  const auto r = hyper_search(
      {}, 1, Quick(),
      [](const distill::DistillConfig& c) { return c.temperature; }, 5);
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_EQ(r.best.temperature, r.trials[0].temperature);
  EXPECT_EQ(r.best.lambda, r.trials[0].lambda);
  EXPECT_EQ(r.best_trial, 0u);
}

TEST(SearchTest, ConstantObjectiveKeepsFirst) {
  const auto r = hyper_search(
      {}, 15, Quick(), [](const distill::DistillConfig&) { return 0.5; }, 9);
  EXPECT_EQ(r.trials.size(), 15u);
  EXPECT_EQ(r.best_trial, 0u);
  EXPECT_EQ(r.best.temperature, r.trials[0].temperature);
  const auto again = hyper_search(
      {}, 15, Quick(), [](const distill::DistillConfig&) { return 0.5; }, 9);
  for (std::size_t i = 0; i < 15; ++i) {
    EXPECT_EQ(again.trials[i].temperature, r.trials[i].temperature);
    EXPECT_EQ(again.trials[i].lambda, r.trials[i].lambda);
  }
}

TEST(SearchTest, Errors) {
  auto f = [](const distill::DistillConfig&) { return 0.0; };
  EXPECT_THROW(hyper_search({{}, {0.5}}, 3, Quick(), f, 0), ConfigError);
  EXPECT_THROW(hyper_search({{1.0}, {}}, 3, Quick(), f, 0), ConfigError);
  EXPECT_THROW(hyper_search({}, 0, Quick(), f, 0), ConfigError);
}

RunRecord SampleRecord(const std::string& id) {
  const Dataset d = gen_synthetic(SyntheticKind::kBlobs, 100, 2, 0.3, 1);
  distill::TrainHistory h;
  const auto cfg = Quick(2, 2);
  const auto m =
      distill::train(zoo::make_mlp(1, 4, 2, 2, true), d, cfg, nullptr, &h);
  return make_record(id, m, cfg, h);
}

TEST(RecordsTest, AppendAndReadBack) {
  const fs::path dir = TempDir("records");
  const RunRecord a = SampleRecord("a");
  const RunRecord b = SampleRecord("b");
  {
    RecordWriter w(dir / "r.jsonl");
    w.append(a);
  }
  {
    RecordWriter w(dir / "r.jsonl");
    w.append(b);
  }
  const auto back = read_records(dir / "r.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(same_except_wall_time(back[0], a));
  EXPECT_TRUE(same_except_wall_time(back[1], b));
  EXPECT_EQ(back[0].experiment_id, "a");
  EXPECT_EQ(back[0].mode, zoo::Mode::kNokd);
  EXPECT_EQ(back[0].engine_version, std::string(kEngineVersion));
  EXPECT_EQ(back[0].test_acc.size(), 2u);
  std::ifstream in(dir / "r.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    EXPECT_TRUE(nlohmann::json::accept(line));
    ++lines;
  }
  EXPECT_EQ(lines, 2);
  fs::remove_all(dir);
}

TEST(RecordsTest, TruncatedTailIsIgnored) {
  const fs::path dir = TempDir("truncated");
  const RunRecord a = SampleRecord("a");
  {
    RecordWriter w(dir / "r.jsonl");
    w.append(a);
  }
  const std::string full = to_json(a).dump();
  {
    std::ofstream out(dir / "r.jsonl", std::ios::app);
    out << full.substr(0, full.size() / 2);
  }
  const auto back = read_records(dir / "r.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(same_except_wall_time(back[0], a));
  {
    std::ofstream out(dir / "bad.jsonl");
    out << "{not json}\n";
  }
  EXPECT_THROW(read_records(dir / "bad.jsonl"), FormatError);
  fs::remove_all(dir);
}

TEST(RecordsTest, ConfigHashMatchesCanonicalSerialization) {
  const RunRecord a = SampleRecord("a");
  EXPECT_EQ(a.config_hash, distill::config_hash(a.config));
  const auto reparsed = distill::distill_config_from_json(
      nlohmann::json::parse(distill::to_json(a.config).dump()));
  EXPECT_EQ(distill::config_hash(reparsed), a.config_hash);
  auto changed = a.config;
  changed.temperature += 1;
  EXPECT_NE(distill::config_hash(changed), a.config_hash);
  RunRecord b = a;
  b.wall_seconds += 10;
  EXPECT_TRUE(same_except_wall_time(a, b));
  b.final_acc += 0.01;
  EXPECT_FALSE(same_except_wall_time(a, b));
}

std::string ErrorOf(const std::string& text) {
  try {
    parse_experiment_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigTest, Defaults) {
  const ExperimentConfig c =
      parse_experiment_config(R"({"task": "takd", "seed": 3})");
  EXPECT_EQ(c.effective_path(), (std::vector<int>{5, 3, 1}));
  EXPECT_EQ(c.distill.seed, 3u);
  EXPECT_EQ(c.distill.epochs, 60);
  EXPECT_EQ(c.distill, [] {
    auto d = desk_distill_config(3);
    return d;
  }());
  EXPECT_EQ(parse_experiment_config(R"({"task": "nokd"})").effective_path(),
            (std::vector<int>{1}));
  const auto partial =
      parse_experiment_config(R"({"task": "blkd", "distill": {"epochs": 5}})");
  EXPECT_EQ(partial.distill.epochs, 5);
  EXPECT_EQ(partial.distill.temperature, 4.0);
}

TEST(ConfigTest, Diagnostics) {
  const std::string syntax = ErrorOf("{\n  \"task\": \"nokd\",\n  oops\n}");
  EXPECT_NE(syntax.find("line 3"), std::string::npos) << syntax;
  const std::string unknown = ErrorOf(R"({"task": "nokd", "epochz": 3})");
  EXPECT_NE(unknown.find("epochz"), std::string::npos) << unknown;
  const std::string nested = ErrorOf(R"({"dataset": {"noise": -1}})");
  EXPECT_NE(nested.find("dataset.noise"), std::string::npos) << nested;
  const std::string type = ErrorOf(R"({"seed": "zero"})");
  EXPECT_NE(type.find("seed"), std::string::npos) << type;
  EXPECT_NE(ErrorOf(R"({"task": "dance"})"), "");
  EXPECT_NE(ErrorOf(R"({"task": "blkd", "path": [5, 3, 1]})"), "");
  EXPECT_NE(ErrorOf(R"({"task": "path_search", "ladder": [5, 4], "k": 2})"),
            "");
  EXPECT_NE(ErrorOf(R"({"landscape": {"steps": 4}})"), "");
  EXPECT_NE(ErrorOf(R"({"search": {"budget": 0}})"), "");
  EXPECT_NE(ErrorOf(R"({"distill": {"temperature": -1}})"), "");
  EXPECT_NE(ErrorOf("[1, 2]"), "");
}

ExperimentConfig SmallExperiment(const std::string& task) {
  ExperimentConfig c = parse_experiment_config(R"({"task": ")" + task +
                                               R"(", "experiment_id": "t",
          "dataset": {"kind": "spirals", "n": 300, "classes": 3},
          "model": {"width": 8},
          "distill": {"epochs": 3, "batch_size": 32},
          "teacher": 3, "assistant": 2, "student": 1,
          "search": {"budget": 2}, "seeds": [4]})");
  return c;
}

TEST(RunExperimentTest, NokdWritesOneRecord) {
  const fs::path dir = TempDir("nokd");
  RecordWriter w(dir / "r.jsonl");
  const ExperimentOutput out = run_experiment(SmallExperiment("nokd"), &w);
  ASSERT_EQ(out.records.size(), 1u);
  EXPECT_EQ(out.records[0].mode, zoo::Mode::kNokd);
  EXPECT_EQ(out.records[0].path, (std::vector<int>{1}));
  EXPECT_EQ(read_records(dir / "r.jsonl").size(), 1u);
  fs::remove_all(dir);
}

TEST(RunExperimentTest, Table1WritesThreeRecordsPerSeed) {
  const ExperimentOutput out = run_experiment(SmallExperiment("table1"));
  ASSERT_EQ(out.records.size(), 3u);
  EXPECT_EQ(out.records[0].mode, zoo::Mode::kNokd);
  EXPECT_EQ(out.records[1].mode, zoo::Mode::kBlkd);
  EXPECT_EQ(out.records[2].mode, zoo::Mode::kTakd);
  for (const auto& r : out.records) EXPECT_EQ(r.seed, 4u);
  EXPECT_EQ(out.records[0].config.lambda, 0.0);
  EXPECT_EQ(out.records[2].path, (std::vector<int>{3, 2, 1}));
}

TEST(RunExperimentTest, ChainIsDeterministic) {
  const ExperimentConfig c = SmallExperiment("chain");
  const ExperimentOutput a = run_experiment(c);
  const ExperimentOutput b = run_experiment(c);
  ASSERT_EQ(a.records.size(), 3u);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_TRUE(same_except_wall_time(a.records[i], b.records[i]));
  }
  ASSERT_FALSE(a.models.empty());
  EXPECT_TRUE(ad::bit_equal(a.models.back().params, b.models.back().params));
}

TEST(RunExperimentTest, BoundsNeedNoData) {
  ExperimentConfig c = parse_experiment_config(
      R"({"task": "bounds", "bounds": {"F_s": 1, "alpha_sr": 1, "n": 10}})");
  const ExperimentOutput out = run_experiment(c);
  EXPECT_TRUE(out.records.empty());
  EXPECT_DOUBLE_EQ(out.summary.at("nokd").get<double>(), 0.1);
}

TEST(GapTest, PercentageGain) {
  EXPECT_NEAR(percentage_gain(0.55, 0.50), 10.0, 1e-9);
  EXPECT_NEAR(percentage_gain(0.45, 0.50), -10.0, 1e-9);
  EXPECT_THROW(percentage_gain(0.5, 0.0), DomainError);
}

TEST(GapTest, NonMonotone) {
  EXPECT_TRUE(is_non_monotone({0.1, 0.3, 0.2}));
  EXPECT_TRUE(is_non_monotone({0.3, 0.1, 0.2}));
  EXPECT_FALSE(is_non_monotone({0.1, 0.2, 0.2, 0.4}));
  EXPECT_FALSE(is_non_monotone({0.4, 0.3}));
  EXPECT_FALSE(is_non_monotone({0.4}));
}

TEST(GapTest, SweepRows) {
  const Dataset d = gen_synthetic(SyntheticKind::kSpirals, 300, 3, 0.2, 0);
  ModelConfig mc;
  mc.width = 8;
  const auto specs = make_specs(mc, {1, 2, 3}, d);
  const GapSweep one =
      gap_sweep({3}, 1, GapFixed::kStudent, d, specs, Quick(1, 2));
  ASSERT_EQ(one.rows.size(), 1u);
  EXPECT_EQ(one.rows[0].size, 3);
  const GapSweep s =
      gap_sweep({3, 2}, 1, GapFixed::kStudent, d, specs, Quick(1, 2));
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.rows[0].size, 2);
  EXPECT_EQ(s.rows[1].size, 3);
  for (const auto& r : s.rows) {
    EXPECT_NEAR(r.gain_pct, 100 * (r.distilled - r.scratch) / r.scratch, 1e-9);
  }
  const GapSweep t =
      gap_sweep({1, 2}, 3, GapFixed::kTeacher, d, specs, Quick(1, 2));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.fixed, GapFixed::kTeacher);
  EXPECT_NE(to_csv(t).find('\n'), std::string::npos);
}

TEST(ProvenanceTest, IdenticalAssistantsGiveIdenticalStudents) {
  const Dataset d = gen_synthetic(SyntheticKind::kSpirals, 300, 3, 0.2, 0);
  const auto ta =
      distill::train(zoo::make_mlp(2, 8, 2, 3, true), d, Quick(3, 3));
  const zoo::TrainedModel copy = ta;
  const auto cfg = Quick(5, 3);
  const auto a = distill::train(zoo::make_mlp(1, 8, 2, 3, true), d, cfg, &ta);
  const auto b = distill::train(zoo::make_mlp(1, 8, 2, 3, true), d, cfg, &copy);
  EXPECT_TRUE(ad::bit_equal(a.params, b.params));
}

TEST(ProvenanceTest, ReportsBothArms) {
  const Dataset d = gen_synthetic(SyntheticKind::kSpirals, 300, 3, 0.2, 0);
  ModelConfig mc;
  mc.width = 8;
  const auto specs = make_specs(mc, {1, 2, 3}, d);
  const auto r =
      ta_provenance_experiment(3, 2, 1, d, specs, Quick(0, 2), {0, 1});
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_NEAR(r.mean_from_scratch,
              (r.rows[0].student_from_scratch_assistant +
               r.rows[1].student_from_scratch_assistant) /
                  2,
              1e-12);
  EXPECT_NEAR(r.mean_from_distilled,
              (r.rows[0].student_from_distilled_assistant +
               r.rows[1].student_from_distilled_assistant) /
                  2,
              1e-12);
}

}  // namespace
}  // namespace takd::harness
