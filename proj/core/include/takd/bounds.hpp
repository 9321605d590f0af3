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
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace takd::bounds {

// Parameters of the three VC-style risk bounds. Subscripts name the pair of
// function classes (s student, a assistant, t teacher, r ground truth).
struct BoundParams {
  double cap_s = 1.0;  // |F_s|_C
  double cap_a = 1.0;  // |F_a|_C
  double cap_t = 1.0;  // |F_t|_C
  double alpha_sr = 0.5;
  double alpha_st = 0.5;
  double alpha_sa = 0.5;
  double alpha_at = 0.5;
  double alpha_tr = 0.5;
  double eps_sr = 0.0;
  double eps_st = 0.0;
  double eps_sa = 0.0;
  double eps_at = 0.0;
  double eps_tr = 0.0;
  std::uint64_t n = 1;
  double c = 1.0;
  // eps_at + eps_sa <= eps_st is taken on trust from the user, never derived.
  bool assistant_premise_asserted = false;

  // Exponents in [1/2, 1], capacities and errors finite and >= 0, c > 0,
  // n >= 1. Zero capacities are accepted to express degenerate classes.
  void validate() const;
};

double nokd_bound(const BoundParams& p);
double blkd_bound(const BoundParams& p);
double takd_bound(const BoundParams& p);
double nokd_bound(const BoundParams& p, double n);
double blkd_bound(const BoundParams& p, double n);
double takd_bound(const BoundParams& p, double n);

struct OrderingReport {
  bool takd_le_blkd = false;
  bool blkd_le_nokd = false;
  double takd_margin = 0.0;  // blkd - takd
  double blkd_margin = 0.0;  // nokd - blkd
};

OrderingReport check_ordering(const BoundParams& p);

struct Crossover {
  std::optional<std::uint64_t> n;
  std::string reason;  // why there is none, empty otherwise
};

inline constexpr std::uint64_t kDefaultCrossoverCap = std::uint64_t{1} << 60;

// An n at which takd_bound <= blkd_bound while it fails at n - 1, found by
// doubling then bisection. Returns no n when the inequality cannot hold as
// n grows without bound, or when the doubling search passes `cap`.
Crossover find_crossover_n(const BoundParams& p,
                           std::uint64_t cap = kDefaultCrossoverCap);

BoundParams bound_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoundParams& p);
nlohmann::json to_json(const OrderingReport& r);

// CSV with header "n,nokd,blkd,takd", one row per n.
std::string bounds_table_csv(const BoundParams& p,
                             const std::vector<std::uint64_t>& ns);
// Geometric grid 10^lo .. 10^hi, one point per decade.
std::vector<std::uint64_t> decade_grid(int lo, int hi);

}  // namespace takd::bounds
