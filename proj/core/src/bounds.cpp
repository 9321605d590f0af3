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

#include "takd/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "takd/errors.hpp"

namespace takd::bounds {
namespace {

double term(double cap, double n, double alpha) {
  return cap == 0.0 ? 0.0 : cap / std::pow(n, alpha);
}

bool holds(const BoundParams& p, std::uint64_t n) {
  return takd_bound(p, static_cast<double>(n)) <=
         blkd_bound(p, static_cast<double>(n));
}

// Sign of blkd - takd as n -> infinity.
int limit_sign(const BoundParams& p) {
  const double slack = p.eps_st - (p.eps_at + p.eps_sa);
  if (slack != 0.0) return slack > 0.0 ? 1 : -1;
  // Equal limits: the slowest-decaying estimation term decides.
  std::map<double, double> coef;
  coef[p.alpha_st] += p.c * p.cap_s;
  coef[p.alpha_at] -= p.c * p.cap_a;
  coef[p.alpha_sa] -= p.c * p.cap_s;
  for (const auto& [alpha, k] : coef) {
    if (k != 0.0) return k > 0.0 ? 1 : -1;
  }
  return 0;
}

void check_range(double v, double lo, double hi, const char* name) {
  if (!(v >= lo && v <= hi)) {
    throw ParameterError(std::string(name) + " out of range");
  }
}

}  // namespace

void BoundParams::validate() const {
  for (double a : {alpha_sr, alpha_st, alpha_sa, alpha_at, alpha_tr}) {
    check_range(a, 0.5, 1.0, "exponent");
  }
  for (double v :
       {cap_s, cap_a, cap_t, eps_sr, eps_st, eps_sa, eps_at, eps_tr}) {
    check_range(v, 0.0, HUGE_VAL, "capacity or approximation error");
    if (!std::isfinite(v)) throw ParameterError("non-finite bound parameter");
  }
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("c must be > 0");
  if (n < 1) throw ParameterError("n must be >= 1");
}

double nokd_bound(const BoundParams& p, double n) {
  return p.c * term(p.cap_s, n, p.alpha_sr) + p.eps_sr;
}

double blkd_bound(const BoundParams& p, double n) {
  return p.c * (term(p.cap_t, n, p.alpha_tr) + term(p.cap_s, n, p.alpha_st)) +
         p.eps_tr + p.eps_st;
}

double takd_bound(const BoundParams& p, double n) {
  return p.c * (term(p.cap_t, n, p.alpha_tr) + term(p.cap_a, n, p.alpha_at) +
                term(p.cap_s, n, p.alpha_sa)) +
         p.eps_tr + p.eps_at + p.eps_sa;
}

double nokd_bound(const BoundParams& p) {
  p.validate();
  return nokd_bound(p, static_cast<double>(p.n));
}

double blkd_bound(const BoundParams& p) {
  p.validate();
  return blkd_bound(p, static_cast<double>(p.n));
}

double takd_bound(const BoundParams& p) {
  p.validate();
  return takd_bound(p, static_cast<double>(p.n));
}

OrderingReport check_ordering(const BoundParams& p) {
  p.validate();
  const double n = static_cast<double>(p.n);
  const double nokd = nokd_bound(p, n);
  const double blkd = blkd_bound(p, n);
  const double takd = takd_bound(p, n);
  return {takd <= blkd, blkd <= nokd, blkd - takd, nokd - blkd};
}

Crossover find_crossover_n(const BoundParams& p, std::uint64_t cap) {
  p.validate();
  if (cap < 1) throw ParameterError("crossover cap must be >= 1");
  if (holds(p, 1)) return {1, ""};
  if (limit_sign(p) <= 0) {
    return {std::nullopt, "inequality cannot hold as n grows"};
  }
  std::uint64_t lo = 1;  // fails
  std::uint64_t hi = 2;
  while (!holds(p, hi)) {
    lo = hi;
    if (hi > cap / 2) {
      if (hi < cap && holds(p, cap)) {
        hi = cap;
        break;
      }
      return {std::nullopt, "no crossover up to cap"};
    }
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (holds(p, mid) ? hi : lo) = mid;
  }
  return {hi, ""};
}

BoundParams bound_params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("bound parameters must be an object");
  BoundParams p;
  auto get = [&](const char* key, double& field) {
    if (j.contains(key)) {
      if (!j[key].is_number()) {
        throw ConfigError(std::string("'") + key + "' must be a number");
      }
      field = j[key].get<double>();
    }
  };
  get("F_s", p.cap_s);
  get("F_a", p.cap_a);
  get("F_t", p.cap_t);
  get("alpha_sr", p.alpha_sr);
  get("alpha_st", p.alpha_st);
  get("alpha_sa", p.alpha_sa);
  get("alpha_at", p.alpha_at);
  get("alpha_tr", p.alpha_tr);
  get("eps_sr", p.eps_sr);
  get("eps_st", p.eps_st);
  get("eps_sa", p.eps_sa);
  get("eps_at", p.eps_at);
  get("eps_tr", p.eps_tr);
  get("c", p.c);
  if (j.contains("n")) {
    if (!j["n"].is_number_unsigned() && !j["n"].is_number_float()) {
      throw ConfigError("'n' must be a positive number");
    }
    const double n = j["n"].get<double>();
    if (!(n >= 1.0) || n > 1.8e19) throw ConfigError("'n' out of range");
    p.n = static_cast<std::uint64_t>(n);
  }
  if (j.contains("assistant_premise_asserted")) {
    p.assistant_premise_asserted = j["assistant_premise_asserted"].get<bool>();
  }
  try {
    p.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return p;
}

nlohmann::json to_json(const BoundParams& p) {
  return {{"F_s", p.cap_s},
          {"F_a", p.cap_a},
          {"F_t", p.cap_t},
          {"alpha_sr", p.alpha_sr},
          {"alpha_st", p.alpha_st},
          {"alpha_sa", p.alpha_sa},
          {"alpha_at", p.alpha_at},
          {"alpha_tr", p.alpha_tr},
          {"eps_sr", p.eps_sr},
          {"eps_st", p.eps_st},
          {"eps_sa", p.eps_sa},
          {"eps_at", p.eps_at},
          {"eps_tr", p.eps_tr},
          {"n", p.n},
          {"c", p.c},
          {"assistant_premise_asserted", p.assistant_premise_asserted}};
}

nlohmann::json to_json(const OrderingReport& r) {
  return {{"takd_le_blkd", r.takd_le_blkd},
          {"blkd_le_nokd", r.blkd_le_nokd},
          {"takd_margin", r.takd_margin},
          {"blkd_margin", r.blkd_margin}};
}

std::string bounds_table_csv(const BoundParams& p,
                             const std::vector<std::uint64_t>& ns) {
  p.validate();
  std::ostringstream out;
  out << "n,nokd,blkd,takd\n";
  char buf[128];
  for (std::uint64_t n : ns) {
    const double x = static_cast<double>(n);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", nokd_bound(p, x),
                  blkd_bound(p, x), takd_bound(p, x));
    out << n << ',' << buf;
  }
  return out.str();
}

std::vector<std::uint64_t> decade_grid(int lo, int hi) {
  if (lo < 0 || hi > 19 || lo > hi) throw ParameterError("bad decade range");
  std::vector<std::uint64_t> ns;
  std::uint64_t v = 1;
  for (int e = 0; e <= hi; ++e) {
    if (e >= lo) ns.push_back(v);
    if (e < hi) v *= 10;
  }
  return ns;
}

}  // namespace takd::bounds
