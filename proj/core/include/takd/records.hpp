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
#include <filesystem>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "takd/distill.hpp"
#include "takd/model.hpp"

namespace takd::harness {

inline constexpr std::string_view kEngineVersion = "0.1.0";

struct RunRecord {
  std::string experiment_id;
  zoo::Mode mode = zoo::Mode::kNokd;
  std::vector<int> path;
  distill::DistillConfig config;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<double> train_acc;
  std::vector<double> test_acc;
  double final_acc = 0.0;
  double wall_seconds = 0.0;
  std::string engine_version{kEngineVersion};
  nlohmann::json extra = nlohmann::json::object();
};

// Record for a model produced by distill::train.
RunRecord make_record(std::string experiment_id, const zoo::TrainedModel& model,
                      const distill::DistillConfig& cfg,
                      const distill::TrainHistory& history);

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

// True when the records agree on everything except wall time.
bool same_except_wall_time(const RunRecord& a, const RunRecord& b);

// Append-only JSON-lines writer. Each record is written as one complete
// line and flushed; appends from several threads are serialized.
class RecordWriter {
 public:
  explicit RecordWriter(const std::filesystem::path& path);
  void append(const RunRecord& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mu_;
};

// Reads every complete line. A final line without its newline (a write
// cut short) is ignored.
std::vector<RunRecord> read_records(const std::filesystem::path& path);

}  // namespace takd::harness
