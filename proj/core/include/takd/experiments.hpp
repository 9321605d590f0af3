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
#include <string>
#include <string_view>
#include <vector>

#include "takd/dataset.hpp"
#include "takd/distill.hpp"
#include "takd/model.hpp"
#include "takd/network.hpp"
#include "takd/records.hpp"
#include "takd/search.hpp"

namespace takd::harness {

struct DatasetConfig {
  std::string kind = "spirals";  // spirals | blobs | idx
  std::size_t n = 3000;
  int classes = 3;
  double noise = 0.2;
  std::uint64_t seed = 0;
  std::string idx_images;
  std::string idx_labels;
  double test_fraction = 0.2;
};

struct ModelConfig {
  std::string family = "mlp";  // mlp | plain_cnn_cifar10 | plain_cnn_cifar100
  int width = 32;
  bool batch_norm = true;
};

struct ExperimentConfig {
  std::string task = "nokd";
  std::string experiment_id = "run";
  std::uint64_t seed = 0;
  DatasetConfig dataset;
  ModelConfig model;
  distill::DistillConfig distill;
  std::vector<int> path;  // empty: derived from teacher/assistant/student
  int teacher = 5;
  int assistant = 3;
  int student = 1;
  std::vector<int> ladder{5, 4, 3, 2, 1};
  int k = 2;
  std::string planner_mode = "surrogate";  // surrogate | train | table
  nlohmann::json surrogate = nlohmann::json::object();
  nlohmann::json table = nlohmann::json::array();
  bool verify = false;  // path search: also run the exhaustive oracle
  bool graph = false;   // path search: export every path prefix
  SearchSpace space;
  int budget = kDefaultBudget;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string gap_fixed = "student";
  std::vector<int> gap_sizes{2, 3, 4, 5};
  int gap_fixed_size = 1;
  double radius = 1.0;
  int steps = 21;
  nlohmann::json bounds = nlohmann::json::object();

  // Path for the chain-style tasks, derived when `path` is empty.
  std::vector<int> effective_path() const;
};

// Learning rate 0.1 dropping to 0.01 at epoch 30 and 0.001 at epoch 45,
// Nesterov momentum 0.9, 60 epochs, batch 64, temperature 4, lambda 0.5.
distill::DistillConfig desk_distill_config(std::uint64_t seed = 0);

// Throws ConfigError with the line and column of a syntax error.
nlohmann::json parse_config_document(std::string_view text);

// Parses and validates a config document. Throws ConfigError naming the
// line and column of a syntax error or the offending field.
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

Dataset make_dataset(const DatasetConfig& cfg);
std::map<int, zoo::NetworkSpec> make_specs(const ModelConfig& cfg,
                                           const std::vector<int>& sizes,
                                           const Dataset& data);

struct Table1Options {
  int teacher = 5;
  int assistant = 3;
  int student = 1;
  SearchSpace space;
  int budget = kDefaultBudget;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  distill::DistillConfig base = desk_distill_config();
  std::string experiment_id = "table1";
};

struct Table1Row {
  std::uint64_t seed = 0;
  double teacher_acc = 0.0;
  double assistant_acc = 0.0;
  double nokd = 0.0;
  double blkd = 0.0;
  double takd = 0.0;
  distill::DistillConfig blkd_config;
  distill::DistillConfig assistant_config;
  distill::DistillConfig takd_config;
};

struct Table1Summary {
  std::vector<Table1Row> rows;
  double mean_nokd = 0.0;
  double mean_blkd = 0.0;
  double mean_takd = 0.0;
  int takd_ge_blkd = 0;  // seeds where TAKD >= BLKD
  int blkd_ge_nokd = 0;
  std::vector<RunRecord> records;  // NOKD, BLKD, TAKD per seed
};

// Per seed: teacher and NOKD student from scratch, BLKD tuned by random
// search, the assistant tuned the same way from the teacher, then TAKD
// tuned from the best assistant.
Table1Summary table1_suite(const Dataset& data,
                           const std::map<int, zoo::NetworkSpec>& specs,
                           const Table1Options& options,
                           RecordWriter* writer = nullptr);
std::string to_csv(const Table1Summary& summary);

enum class GapFixed { kStudent, kTeacher };

struct GapRow {
  int size = 0;  // the varied size
  double distilled = 0.0;
  double scratch = 0.0;
  double teacher_acc = 0.0;
  double gain_pct = 0.0;
};

struct GapSweep {
  GapFixed fixed = GapFixed::kStudent;
  int fixed_size = 0;
  std::vector<GapRow> rows;  // ascending varied size
  bool non_monotone = false;
};

double percentage_gain(double distilled, double scratch);
// True when the sequence both rises and falls somewhere.
bool is_non_monotone(const std::vector<double>& values);

// Fixed student: each size is a teacher distilled into `fixed_size`.
// Fixed teacher: `fixed_size` is distilled into each size.
GapSweep gap_sweep(std::vector<int> sizes, int fixed_size, GapFixed fixed,
                   const Dataset& data,
                   const std::map<int, zoo::NetworkSpec>& specs,
                   const distill::DistillConfig& cfg);
std::string to_csv(const GapSweep& sweep);

struct ProvenanceRow {
  std::uint64_t seed = 0;
  double scratch_assistant = 0.0;
  double distilled_assistant = 0.0;
  double student_from_scratch_assistant = 0.0;
  double student_from_distilled_assistant = 0.0;
};

struct ProvenanceResult {
  std::vector<ProvenanceRow> rows;
  double mean_from_scratch = 0.0;
  double mean_from_distilled = 0.0;
};

// Student distilled from an assistant trained from scratch versus one
// distilled from the teacher, with identical student seeds.
ProvenanceResult ta_provenance_experiment(
    int teacher, int assistant, int student, const Dataset& data,
    const std::map<int, zoo::NetworkSpec>& specs,
    const distill::DistillConfig& cfg, const std::vector<std::uint64_t>& seeds);

struct FlatnessComparison {
  double nokd = 0.0;
  double blkd = 0.0;
  double takd = 0.0;
  bool takd_flatter_than_nokd = false;
};

// NOKD, BLKD and TAKD students with the same seed, compared by
// flatness_metric on the test split.
FlatnessComparison flatness_suite(int teacher, int assistant, int student,
                                  const Dataset& data,
                                  const std::map<int, zoo::NetworkSpec>& specs,
                                  const distill::DistillConfig& cfg,
                                  double radius, int steps);

struct ExperimentOutput {
  std::vector<RunRecord> records;
  nlohmann::json summary = nlohmann::json::object();
  std::map<std::string, std::string> artifacts;  // file name -> contents
  std::vector<zoo::TrainedModel> models;
};

// Dispatches on `task`: nokd, blkd, takd, chain, table1, path_search,
// gap_sweep, ta_provenance, landscape, bounds. Records are appended to
// `writer` as they are produced.
ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                RecordWriter* writer = nullptr);

}  // namespace takd::harness
