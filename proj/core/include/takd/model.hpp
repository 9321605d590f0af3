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
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "takd/network.hpp"
#include "takd/parameters.hpp"

namespace takd::zoo {

// NOKD: trained from labels only. BLKD: one distillation step from the
// teacher. TAKD: two or more steps through teacher assistants.
enum class Mode { kNokd, kBlkd, kTakd };

std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view name);
// Mode implied by a distillation path of the given length.
Mode mode_for_path_length(std::size_t length);

struct Provenance {
  Mode mode = Mode::kNokd;
  std::vector<int> distillation_path;
  std::uint64_t seed = 0;
  std::string config_hash;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Metrics {
  double train_acc = 0.0;
  double test_acc = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct TrainedModel {
  NetworkSpec spec;
  ad::ParameterSet params;
  Provenance provenance;
  Metrics metrics;
};

// Untrained model: initialized parameters, NOKD provenance with path [size].
TrainedModel build_model(const NetworkSpec& spec, std::uint64_t seed);

nlohmann::json to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j);

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Container layout, all integers little-endian:
//   "TAKD" | u32 version | u64 header length | header JSON (UTF-8)
//   | f32 arrays for every parameter entry in spec order | u32 CRC-32 of all
//   preceding bytes.
// The header JSON carries the spec, provenance, metrics and the parameter
// names/shapes.
std::vector<std::uint8_t> serialize_model(const TrainedModel& model);
// Throws FormatError on bad magic, version, checksum, truncation or a
// header/payload mismatch.
TrainedModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace takd::zoo
