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

#include "takd/landscape.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "takd/distill.hpp"
#include "takd/errors.hpp"
#include "takd/network.hpp"
#include "takd/rng.hpp"

namespace takd::landscape {
namespace {

bool is_weight(const std::string& name) {
  return name.size() >= 6 && name.compare(name.size() - 6, 6, "weight") == 0;
}

void fill_direction(const ad::ParameterSet& params, Rng& rng,
                    std::vector<std::vector<double>>& out) {
  out.clear();
  for (const auto& p : params) {
    std::vector<double> block(p.value.numel(), 0.0);
    if (p.trainable && is_weight(p.name) && !p.value.shape().empty()) {
      const std::size_t filters = p.value.shape()[0];
      const std::size_t per = filters == 0 ? 0 : block.size() / filters;
      for (double& v : block) v = rng.gaussian();
      for (std::size_t f = 0; f < filters; ++f) {
        double wn = 0.0, dn = 0.0;
        for (std::size_t k = f * per; k < (f + 1) * per; ++k) {
          const double w = p.value.data()[k];
          wn += w * w;
          dn += block[k] * block[k];
        }
        const double s = (wn == 0.0 || dn == 0.0) ? 0.0 : std::sqrt(wn / dn);
        for (std::size_t k = f * per; k < (f + 1) * per; ++k) block[k] *= s;
      }
    }
    out.push_back(std::move(block));
  }
}

std::vector<double> grid_coords(double radius, int steps) {
  if (steps < 1 || steps % 2 == 0) {
    throw ParameterError("steps must be odd and positive");
  }
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw ParameterError("radius must be finite and >= 0");
  }
  const int r = (steps - 1) / 2;
  std::vector<double> a(steps, 0.0);
  for (int i = 0; i < steps; ++i) {
    a[i] = r == 0 ? 0.0 : radius * static_cast<double>(i - r) / r;
  }
  return a;
}

double ce_loss(const zoo::TrainedModel& model, const ad::ParameterSet& params,
               const harness::Split& split) {
  const ad::Tensor logits =
      zoo::predict_logits(model.spec, params, split.features);
  return distill::student_loss_value(logits, nullptr, split.labels, 0.0, 1.0);
}

}  // namespace

Directions filter_normalized_directions(const ad::ParameterSet& params,
                                        std::uint64_t seed) {
  Directions d;
  d.seed = seed;
  Rng r1 = Rng::substream(seed, "landscape", 0);
  Rng r2 = Rng::substream(seed, "landscape", 1);
  fill_direction(params, r1, d.delta);
  fill_direction(params, r2, d.eta);
  return d;
}

LossSurface loss_surface(const std::function<double(double, double)>& loss,
                         double radius, int steps) {
  LossSurface s;
  s.coords = grid_coords(radius, steps);
  s.radius = radius;
  s.steps = steps;
  s.grid.assign(steps, std::vector<double>(steps, 0.0));
  for (int i = 0; i < steps; ++i) {
    for (int j = 0; j < steps; ++j) {
      double v;
      try {
        v = loss(s.coords[i], s.coords[j]);
      } catch (const NumericError&) {
        v = std::nan("");
      }
      if (!std::isfinite(v)) s.has_non_finite = true;
      s.grid[i][j] = v;
    }
  }
  s.center_loss = s.grid[s.r()][s.r()];
  return s;
}

double model_loss(const zoo::TrainedModel& model, const harness::Split& split) {
  return ce_loss(model, model.params, split);
}

LossSurface loss_surface(const zoo::TrainedModel& model,
                         const harness::Split& split, const Directions& dirs,
                         double radius, int steps) {
  const ad::ParameterSet& base = model.params;
  if (dirs.delta.size() != base.size() || dirs.eta.size() != base.size()) {
    throw DimensionError("directions do not match the model parameters");
  }
  for (std::size_t k = 0; k < base.size(); ++k) {
    if (dirs.delta[k].size() != base[k].value.numel() ||
        dirs.eta[k].size() != base[k].value.numel()) {
      throw DimensionError("direction block size mismatch for " + base[k].name);
    }
  }
  ad::ParameterSet work = model.params;
  auto loss = [&](double a, double b) {
    if (a == 0.0 && b == 0.0) return ce_loss(model, model.params, split);
    for (std::size_t k = 0; k < base.size(); ++k) {
      const auto src = base[k].value.data();
      auto dst = work[k].value.data();
      for (std::size_t e = 0; e < src.size(); ++e) {
        dst[e] = static_cast<float>(src[e] + a * dirs.delta[k][e] +
                                    b * dirs.eta[k][e]);
      }
    }
    return ce_loss(model, work, split);
  };
  LossSurface s = loss_surface(loss, radius, steps);
  s.seed = dirs.seed;
  return s;
}

double flatness_metric(const LossSurface& surface) {
  const int r = surface.r();
  if (r == 0 || !(surface.radius >= 1.0)) {
    throw DomainError("flatness needs a surface with radius >= 1");
  }
  const double h = surface.radius / r;  // grid spacing
  auto at = [&](double x, double y) {
    const double fx = x / h + r, fy = y / h + r;
    const int i0 = std::min(static_cast<int>(std::floor(fx)), 2 * r - 1);
    const int j0 = std::min(static_cast<int>(std::floor(fy)), 2 * r - 1);
    const double tx = fx - i0, ty = fy - j0;
    const auto g = [&](int i, int j) {
      return surface.grid[i][j] - surface.center_loss;
    };
    return (1 - tx) * (1 - ty) * g(i0, j0) + tx * (1 - ty) * g(i0 + 1, j0) +
           (1 - tx) * ty * g(i0, j0 + 1) + tx * ty * g(i0 + 1, j0 + 1);
  };
  double sum = 0.0;
  for (int k = 0; k < kFlatnessSamples; ++k) {
    const double t = 2.0 * std::numbers::pi * k / kFlatnessSamples;
    sum += at(std::cos(t), std::sin(t));
  }
  return sum / kFlatnessSamples;
}

std::string to_csv(const LossSurface& surface) {
  std::ostringstream out;
  out << "a,b,loss\n";
  char buf[96];
  for (int i = 0; i < surface.steps; ++i) {
    for (int j = 0; j < surface.steps; ++j) {
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", surface.coords[i],
                    surface.coords[j], surface.grid[i][j]);
      out << buf;
    }
  }
  return out.str();
}

}  // namespace takd::landscape
