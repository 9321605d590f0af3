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

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace takd {

// splitmix64 step. Used both for seeding and for deriving substream keys.
std::uint64_t splitmix64(std::uint64_t& state);

// 64-bit FNV-1a over bytes.
std::uint64_t fnv1a64(std::string_view bytes);

// xoshiro256** generator seeded through splitmix64.
//
// Every stochastic choice in the workbench draws from a named substream,
// `Rng::substream(root, "init")` etc., so that changing the order in which
// components consume randomness never perturbs unrelated components.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng substream(std::uint64_t root_seed, std::string_view name);
  static Rng substream(std::uint64_t root_seed, std::string_view name,
                       std::uint64_t index);

  std::uint64_t next();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal via Box-Muller. The spare value is cached.
  double gaussian();

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace takd
