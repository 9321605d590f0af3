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

#include "takd/records.hpp"

#include <sstream>

#include "takd/errors.hpp"

namespace takd::harness {

RunRecord make_record(std::string experiment_id, const zoo::TrainedModel& model,
                      const distill::DistillConfig& cfg,
                      const distill::TrainHistory& history) {
  RunRecord r;
  r.experiment_id = std::move(experiment_id);
  r.mode = model.provenance.mode;
  r.path = model.provenance.distillation_path;
  r.config = cfg;
  r.config_hash = distill::config_hash(cfg);
  r.seed = cfg.seed;
  r.train_acc = history.train_acc;
  r.test_acc = history.test_acc;
  r.final_acc = model.metrics.test_acc;
  r.wall_seconds = history.wall_seconds;
  return r;
}

nlohmann::json to_json(const RunRecord& r) {
  return {{"experiment_id", r.experiment_id},
          {"mode", zoo::mode_name(r.mode)},
          {"path", r.path},
          {"config", distill::to_json(r.config)},
          {"config_hash", r.config_hash},
          {"seed", r.seed},
          {"train_acc", r.train_acc},
          {"test_acc", r.test_acc},
          {"final_acc", r.final_acc},
          {"wall_seconds", r.wall_seconds},
          {"engine_version", r.engine_version},
          {"extra", r.extra}};
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  try {
    RunRecord r;
    r.experiment_id = j.at("experiment_id").get<std::string>();
    r.mode = zoo::parse_mode(j.at("mode").get<std::string>());
    r.path = j.at("path").get<std::vector<int>>();
    r.config = distill::distill_config_from_json(j.at("config"));
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.train_acc = j.at("train_acc").get<std::vector<double>>();
    r.test_acc = j.at("test_acc").get<std::vector<double>>();
    r.final_acc = j.at("final_acc").get<double>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.engine_version = j.at("engine_version").get<std::string>();
    r.extra = j.value("extra", nlohmann::json::object());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad run record: ") + e.what());
  }
}

bool same_except_wall_time(const RunRecord& a, const RunRecord& b) {
  nlohmann::json ja = to_json(a), jb = to_json(b);
  ja.erase("wall_seconds");
  jb.erase("wall_seconds");
  return ja == jb;
}

RecordWriter::RecordWriter(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  out_.open(path, std::ios::app | std::ios::binary);
  if (!out_) throw Error("cannot open record file " + path.string());
}

void RecordWriter::append(const RunRecord& record) {
  const std::string line = to_json(record).dump() + "\n";
  std::lock_guard<std::mutex> lock(mu_);
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) throw Error("failed to append to " + path_.string());
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open record file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<RunRecord> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) break;
    const std::string_view line(text.data() + start, nl - start);
    if (!line.empty()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("record file " + path.string() + ": " + e.what());
      }
      out.push_back(run_record_from_json(j));
    }
    start = nl + 1;
  }
  return out;
}

}  // namespace takd::harness
