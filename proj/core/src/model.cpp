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

#include "takd/model.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "takd/errors.hpp"

namespace takd::zoo {

using nlohmann::json;

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::kNokd:
      return "NOKD";
    case Mode::kBlkd:
      return "BLKD";
    case Mode::kTakd:
      return "TAKD";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  if (name == "NOKD") return Mode::kNokd;
  if (name == "BLKD") return Mode::kBlkd;
  if (name == "TAKD") return Mode::kTakd;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

Mode mode_for_path_length(std::size_t length) {
  if (length <= 1) return Mode::kNokd;
  return length == 2 ? Mode::kBlkd : Mode::kTakd;
}

TrainedModel build_model(const NetworkSpec& spec, std::uint64_t seed) {
  TrainedModel model;
  model.spec = spec;
  model.params = init_parameters(spec, seed);
  model.provenance.mode = Mode::kNokd;
  model.provenance.distillation_path = {spec.size};
  model.provenance.seed = seed;
  return model;
}

json to_json(const Provenance& p) {
  return {{"mode", mode_name(p.mode)},
          {"distillation_path", p.distillation_path},
          {"seed", p.seed},
          {"config_hash", p.config_hash}};
}

Provenance provenance_from_json(const json& j) {
  Provenance p;
  p.mode = parse_mode(j.at("mode").get<std::string>());
  p.distillation_path = j.at("distillation_path").get<std::vector<int>>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.config_hash = j.at("config_hash").get<std::string>();
  return p;
}

namespace {

constexpr char kMagic[4] = {'T', 'A', 'K', 'D'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t at,
                     int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(bytes[at + i]) << (8 * i);
  }
  return v;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const TrainedModel& model) {
  json params = json::array();
  for (const auto& p : model.params) {
    params.push_back({{"name", p.name},
                      {"shape", p.value.shape()},
                      {"trainable", p.trainable}});
  }
  const json header = {{"spec", to_json(model.spec)},
                       {"provenance", to_json(model.provenance)},
                       {"metrics",
                        {{"train_acc", model.metrics.train_acc},
                         {"test_acc", model.metrics.test_acc}}},
                       {"parameters", params}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kModelFormatVersion);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& p : model.params) {
    for (float v : p.value.data())
      put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  put_u32(out, crc32_of(out));
  return out;
}

TrainedModel deserialize_model(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kPrefix = 4 + 4 + 8;
  if (bytes.size() < kPrefix + 4) throw FormatError("model: truncated stream");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("model: bad magic (expected \"TAKD\")");
  }
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  if (version != kModelFormatVersion) {
    throw FormatError("model: unsupported version " + std::to_string(version));
  }
  const std::size_t body = bytes.size() - 4;
  const auto stored_crc = static_cast<std::uint32_t>(get_le(bytes, body, 4));
  if (crc32_of(bytes.first(body)) != stored_crc) {
    throw FormatError("model: checksum mismatch (corrupt or truncated)");
  }
  const std::uint64_t header_len = get_le(bytes, 8, 8);
  if (header_len > body - kPrefix) throw FormatError("model: truncated header");

  TrainedModel model;
  std::size_t cursor = kPrefix + header_len;
  try {
    const json header =
        json::parse(bytes.begin() + kPrefix, bytes.begin() + cursor);
    model.spec = network_spec_from_json(header.at("spec"));
    model.provenance = provenance_from_json(header.at("provenance"));
    model.metrics.train_acc =
        header.at("metrics").at("train_acc").get<double>();
    model.metrics.test_acc = header.at("metrics").at("test_acc").get<double>();
    for (const auto& p : header.at("parameters")) {
      ad::Shape shape = p.at("shape").get<ad::Shape>();
      const std::size_t n = ad::shape_numel(shape);
      if (n > (body - cursor) / 4)
        throw FormatError("model: truncated payload");
      std::vector<float> data(n);
      for (std::size_t i = 0; i < n; ++i, cursor += 4) {
        data[i] = std::bit_cast<float>(
            static_cast<std::uint32_t>(get_le(bytes, cursor, 4)));
      }
      model.params.add(p.at("name").get<std::string>(),
                       ad::Tensor(std::move(shape), std::move(data)),
                       p.at("trainable").get<bool>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: malformed header: ") + e.what());
  } catch (const SpecError& e) {
    throw FormatError(std::string("model: invalid spec: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model: invalid provenance: ") + e.what());
  }
  if (cursor != body) throw FormatError("model: trailing bytes after payload");
  // Shapes must agree with what the spec would build.
  const ad::ParameterSet expected = init_parameters(model.spec, 0);
  if (expected.size() != model.params.size()) {
    throw FormatError("model: parameter count does not match spec");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i].name != model.params[i].name ||
        expected[i].value.shape() != model.params[i].value.shape()) {
      throw FormatError("model: parameter '" + model.params[i].name +
                        "' does not match spec");
    }
  }
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw FormatError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace takd::zoo
