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

#include "takd/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>

#include "takd/errors.hpp"
#include "takd/rng.hpp"

namespace takd::harness {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void Dataset::validate() const {
  for (const Split* s : {&train, &test}) {
    if (s->labels.empty()) continue;
    if (s->features.rank() == 0 || s->features.dim(0) != s->labels.size()) {
      throw FormatError("dataset: feature rows do not match label count");
    }
    for (int l : s->labels) {
      if (l < 0 || l >= num_classes) {
        throw FormatError("dataset: label " + std::to_string(l) +
                          " outside [0, " + std::to_string(num_classes) + ")");
      }
    }
  }
}

IdxImages parse_idx_images(std::span<const std::uint8_t> b) {
  if (b.size() < 16) throw FormatError("idx images: truncated header");
  const std::uint32_t magic = read_be32(b, 0);
  if (magic != kImageMagic) {
    throw FormatError("idx images: bad magic 0x" + [&] {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%08x", magic);
      return std::string(buf);
    }());
  }
  IdxImages img;
  img.count = read_be32(b, 4);
  img.rows = read_be32(b, 8);
  img.cols = read_be32(b, 12);
  if (img.rows == 0 || img.cols == 0) {
    throw FormatError("idx images: zero image dimension");
  }
  const std::uint64_t need = std::uint64_t{img.count} * img.rows * img.cols;
  if (b.size() - 16 != need) {
    throw FormatError("idx images: payload is " +
                      std::to_string(b.size() - 16) +
                      " bytes, header declares " + std::to_string(need));
  }
  img.pixels.assign(b.begin() + 16, b.end());
  return img;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> b) {
  if (b.size() < 8) throw FormatError("idx labels: truncated header");
  if (read_be32(b, 0) != kLabelMagic)
    throw FormatError("idx labels: bad magic");
  const std::uint32_t count = read_be32(b, 4);
  if (b.size() - 8 != count) {
    throw FormatError("idx labels: payload length does not match count");
  }
  return {b.begin() + 8, b.end()};
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  return parse_idx_images(slurp(path));
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  return parse_idx_labels(slurp(path));
}

std::vector<std::uint8_t> encode_idx_images(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  put_be32(out, kImageMagic);
  put_be32(out, images.count);
  put_be32(out, images.rows);
  put_be32(out, images.cols);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(
    std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  put_be32(out, kLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

Dataset dataset_from_idx(const IdxImages& images,
                         std::span<const std::uint8_t> labels) {
  if (labels.size() != images.count) {
    throw FormatError("idx: " + std::to_string(images.count) + " images but " +
                      std::to_string(labels.size()) + " labels");
  }
  Dataset ds;
  ds.name = "idx";
  ds.feature_shape = {1, images.rows, images.cols};
  double sum = 0.0;
  for (auto p : images.pixels) sum += p / 255.0;
  const double n = std::max<double>(1.0, images.pixels.size());
  const double mean = sum / n;
  double sq = 0.0;
  for (auto p : images.pixels) sq += (p / 255.0 - mean) * (p / 255.0 - mean);
  const double stddev = std::sqrt(sq / n);
  const double scale = stddev > 0.0 ? 0.5 / stddev : 1.0;
  // Raw pixel p maps to (p/255 - mean) * scale.
  ds.normalization.mean = {mean * 255.0};
  ds.normalization.scale = {scale / 255.0};
  std::vector<float> feats(images.pixels.size());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    feats[i] = static_cast<float>((images.pixels[i] / 255.0 - mean) * scale);
  }
  ds.train.features = ad::Tensor(
      ad::Shape{images.count, 1, images.rows, images.cols}, std::move(feats));
  int max_label = -1;
  for (auto l : labels) {
    ds.train.labels.push_back(l);
    max_label = std::max<int>(max_label, l);
  }
  ds.num_classes = max_label + 1;
  ds.test.features = ad::Tensor(ad::Shape{0, 1, images.rows, images.cols});
  ds.validate();
  return ds;
}

Dataset load_idx(const std::filesystem::path& images,
                 const std::filesystem::path& labels) {
  const IdxImages img = read_idx_images(images);
  const auto lab = read_idx_labels(labels);
  return dataset_from_idx(img, lab);
}

namespace {

constexpr double kSpiralTurns = 3.0;

Split take_rows(const Split& src, const std::vector<std::size_t>& rows) {
  const std::size_t n = src.size();
  const std::size_t width = n ? src.features.numel() / n : 0;
  ad::Shape shape = src.features.shape();
  shape[0] = rows.size();
  std::vector<float> data;
  data.reserve(rows.size() * width);
  Split out;
  for (std::size_t r : rows) {
    auto first = src.features.data().begin() + r * width;
    data.insert(data.end(), first, first + width);
    out.labels.push_back(src.labels[r]);
  }
  out.features = ad::Tensor(std::move(shape), std::move(data));
  return out;
}

}  // namespace

void split_train_test(Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ParameterError("test_fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> order(ds.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng::substream(seed, "split");
  rng.shuffle(order);
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(order.size())));
  std::vector<std::size_t> test(order.begin(), order.begin() + n_test);
  std::vector<std::size_t> train(order.begin() + n_test, order.end());
  Split all = std::move(ds.train);
  ds.train = take_rows(all, train);
  ds.test = take_rows(all, test);
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "blobs") return SyntheticKind::kBlobs;
  if (name == "spirals") return SyntheticKind::kSpirals;
  throw ConfigError("unknown synthetic dataset '" + std::string(name) + "'");
}

Dataset gen_synthetic(SyntheticKind kind, std::size_t n, int classes,
                      double noise, std::uint64_t seed) {
  if (classes < 2) throw ParameterError("synthetic data needs >= 2 classes");
  if (n < static_cast<std::size_t>(classes) * 10) {
    throw ParameterError("synthetic data needs n >= 10 * classes");
  }
  if (!(noise >= 0.0)) throw ParameterError("noise must be nonnegative");
  Rng rng =
      Rng::substream(seed, kind == SyntheticKind::kBlobs ? "blobs" : "spirals");
  const auto c_count = static_cast<std::size_t>(classes);
  std::vector<float> xy;
  std::vector<int> labels;
  xy.reserve(2 * n);
  for (std::size_t c = 0; c < c_count; ++c) {
    const std::size_t m = n / c_count + (c < n % c_count ? 1 : 0);
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(c) /
                         static_cast<double>(classes);
    for (std::size_t i = 0; i < m; ++i) {
      double x, y;
      if (kind == SyntheticKind::kBlobs) {
        x = 2.0 * std::cos(phase) + noise * rng.gaussian();
        y = 2.0 * std::sin(phase) + noise * rng.gaussian();
      } else {
        const double t = static_cast<double>(i) / static_cast<double>(m);
        const double radius = 0.1 + 0.9 * t;
        const double theta = phase + 2.0 * std::numbers::pi * kSpiralTurns * t +
                             noise * rng.gaussian();
        x = radius * std::cos(theta);
        y = radius * std::sin(theta);
      }
      xy.push_back(static_cast<float>(x));
      xy.push_back(static_cast<float>(y));
      labels.push_back(static_cast<int>(c));
    }
  }
  Dataset ds;
  ds.name = kind == SyntheticKind::kBlobs ? "blobs" : "spirals";
  ds.num_classes = classes;
  ds.feature_shape = {2};
  ds.train.features = ad::Tensor(ad::Shape{n, 2}, std::move(xy));
  ds.train.labels = std::move(labels);
  split_train_test(ds, 0.2, seed);

  // Standardize with train statistics: zero mean, std 0.5 per feature.
  ds.normalization.mean.assign(2, 0.0);
  ds.normalization.scale.assign(2, 1.0);
  const std::size_t nt = ds.train.size();
  for (std::size_t f = 0; f < 2; ++f) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < nt; ++r) sum += ds.train.features[r * 2 + f];
    const double mean = sum / static_cast<double>(nt);
    for (std::size_t r = 0; r < nt; ++r) {
      const double d = ds.train.features[r * 2 + f] - mean;
      sq += d * d;
    }
    const double stddev = std::sqrt(sq / static_cast<double>(nt));
    const double scale = stddev > 0.0 ? 0.5 / stddev : 1.0;
    ds.normalization.mean[f] = mean;
    ds.normalization.scale[f] = scale;
    for (Split* s : {&ds.train, &ds.test}) {
      for (std::size_t r = 0; r < s->size(); ++r) {
        float& v = s->features[r * 2 + f];
        v = static_cast<float>((v - mean) * scale);
      }
    }
  }
  ds.validate();
  return ds;
}

}  // namespace takd::harness
