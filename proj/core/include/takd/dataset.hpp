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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "takd/tensor.hpp"

namespace takd::harness {

struct Split {
  ad::Tensor features;  // [N x feature_shape...]
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

// Per-feature affine map applied to raw values: x' = (x - mean) * scale.
// A single entry applies to every feature.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> scale;
};

struct Dataset {
  std::string name;
  Split train;
  Split test;
  int num_classes = 0;
  std::vector<std::size_t> feature_shape;
  Normalization normalization;

  // Label range and feature/label length checks; throws FormatError.
  void validate() const;
};

// Raw IDX payloads.
struct IdxImages {
  std::uint32_t count = 0, rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;
};

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_idx_images(const IdxImages& images);
std::vector<std::uint8_t> encode_idx_labels(
    std::span<const std::uint8_t> labels);

// Loads an IDX image/label pair into the train split ([N x 1 x rows x cols]).
// Pixels are mapped to [0,1], centered and rescaled so their standard
// deviation is 0.5. Throws FormatError on wrong magic, truncated payloads or
// a count mismatch between the two files.
Dataset load_idx(const std::filesystem::path& images,
                 const std::filesystem::path& labels);
Dataset dataset_from_idx(const IdxImages& images,
                         std::span<const std::uint8_t> labels);

// Moves a seeded random `test_fraction` of the train split to the test split.
void split_train_test(Dataset& ds, double test_fraction, std::uint64_t seed);

enum class SyntheticKind { kBlobs, kSpirals };
SyntheticKind parse_synthetic_kind(std::string_view name);

// Deterministic 2-D toy data. Blobs: isotropic Gaussian clusters (std
// `noise`) centred on a circle of radius 2. Spirals: interleaved arms with
// angular noise `noise`. 80/20 train/test split by seeded shuffle; features
// standardized with train statistics to zero mean and std 0.5.
Dataset gen_synthetic(SyntheticKind kind, std::size_t n, int classes,
                      double noise, std::uint64_t seed);

}  // namespace takd::harness
