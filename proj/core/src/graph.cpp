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

#include "takd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>

namespace takd::ad {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void require_rank(const Shape& s, std::size_t rank, const char* op) {
  if (s.size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got " + shape_string(s));
  }
}

template <class T>
void check_finite(const BasicTensor<T>& v, const char* op) {
  if (!v.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
}

}  // namespace

template <class T>
Var Graph<T>::push(Value value, bool requires_grad,
                   std::function<void(Graph&, const Node&)> backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

template <class T>
typename Graph<T>::Value& Graph<T>::grad_buffer(Var v) {
  Node& n = nodes_[v.index];
  if (n.grad.numel() != n.value.numel()) n.grad = Value(n.value.shape());
  return n.grad;
}

template <class T>
void Graph<T>::mix_kink(std::uint64_t bits) {
  kink_signature_ ^= bits + 0x9e3779b97f4a7c15ULL + (kink_signature_ << 6) +
                     (kink_signature_ >> 2);
}

template <class T>
Var Graph<T>::input(Value value) {
  check_finite(value, "input");
  return push(std::move(value), false, {});
}

template <class T>
Var Graph<T>::parameter(Parameter<T>& param) {
  check_finite(param.value, "parameter");
  Var v = push(param.value, param.trainable, {});
  nodes_[v.index].param = &param;
  return v;
}

template <class T>
Var Graph<T>::dense(Var xv, Var wv, Var bv) {
  const Value& x = value(xv);
  const Value& w = value(wv);
  const Value& b = value(bv);
  require_rank(x.shape(), 2, "dense input");
  require_rank(w.shape(), 2, "dense weights");
  require_rank(b.shape(), 1, "dense bias");
  const std::size_t batch = x.dim(0), in = x.dim(1), out = w.dim(0);
  if (w.dim(1) != in || b.dim(0) != out) {
    throw DimensionError("dense: weights " + shape_string(w.shape()) +
                         ", bias " + shape_string(b.shape()) + ", input " +
                         shape_string(x.shape()));
  }
  Value y(Shape{batch, out});
  for (std::size_t r = 0; r < batch; ++r) {
    const T* xr = &x[r * in];
    for (std::size_t o = 0; o < out; ++o) {
      const T* wr = &w[o * in];
      T acc = 0;
      for (std::size_t i = 0; i < in; ++i) acc += wr[i] * xr[i];
      y[r * out + o] = acc + b[o];
    }
  }
  check_finite(y, "dense");
  const bool rg = needs_grad(xv) || needs_grad(wv) || needs_grad(bv);
  return push(std::move(y), rg,
              [xv, wv, bv, batch, in, out](Graph& g, const Node& self) {
                const Value& dy = self.grad;
                if (g.needs_grad(xv)) {
                  const Value& w = g.value(wv);
                  Value& dx = g.grad_buffer(xv);
                  for (std::size_t r = 0; r < batch; ++r) {
                    T* dxr = &dx[r * in];
                    for (std::size_t o = 0; o < out; ++o) {
                      const T d = dy[r * out + o];
                      const T* wr = &w[o * in];
                      for (std::size_t i = 0; i < in; ++i) dxr[i] += d * wr[i];
                    }
                  }
                }
                if (g.needs_grad(wv)) {
                  const Value& x = g.value(xv);
                  Value& dw = g.grad_buffer(wv);
                  for (std::size_t o = 0; o < out; ++o) {
                    T* dwr = &dw[o * in];
                    for (std::size_t r = 0; r < batch; ++r) {
                      const T d = dy[r * out + o];
                      const T* xr = &x[r * in];
                      for (std::size_t i = 0; i < in; ++i) dwr[i] += d * xr[i];
                    }
                  }
                }
                if (g.needs_grad(bv)) {
                  Value& db = g.grad_buffer(bv);
                  for (std::size_t r = 0; r < batch; ++r) {
                    for (std::size_t o = 0; o < out; ++o)
                      db[o] += dy[r * out + o];
                  }
                }
              });
}

template <class T>
Var Graph<T>::conv2d(Var xv, Var kv, Var bv) {
  const Value& x = value(xv);
  const Value& k = value(kv);
  const Value& b = value(bv);
  require_rank(x.shape(), 4, "conv2d input");
  require_rank(k.shape(), 4, "conv2d kernels");
  require_rank(b.shape(), 1, "conv2d bias");
  const std::size_t batch = x.dim(0), cin = x.dim(1), h = x.dim(2),
                    wd = x.dim(3), cout = k.dim(0);
  if (k.dim(2) != 3 || k.dim(3) != 3) {
    throw DimensionError("conv2d: kernels must be 3x3, got " +
                         shape_string(k.shape()));
  }
  if (k.dim(1) != cin || b.dim(0) != cout) {
    throw DimensionError("conv2d: channel mismatch, kernels " +
                         shape_string(k.shape()) + ", input " +
                         shape_string(x.shape()));
  }
  Value y(Shape{batch, cout, h, wd});
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t o = 0; o < cout; ++o) {
      T* yp = &y[(n * cout + o) * h * wd];
      for (std::size_t p = 0; p < h * wd; ++p) yp[p] = b[o];
      for (std::size_t c = 0; c < cin; ++c) {
        const T* xp = &x[(n * cin + c) * h * wd];
        const T* kp = &k[(o * cin + c) * 9];
        for (std::size_t r = 0; r < h; ++r) {
          for (std::size_t col = 0; col < wd; ++col) {
            T acc = 0;
            for (int ky = -1; ky <= 1; ++ky) {
              const std::ptrdiff_t rr = static_cast<std::ptrdiff_t>(r) + ky;
              if (rr < 0 || rr >= static_cast<std::ptrdiff_t>(h)) continue;
              for (int kx = -1; kx <= 1; ++kx) {
                const std::ptrdiff_t cc = static_cast<std::ptrdiff_t>(col) + kx;
                if (cc < 0 || cc >= static_cast<std::ptrdiff_t>(wd)) continue;
                acc += kp[(ky + 1) * 3 + (kx + 1)] * xp[rr * wd + cc];
              }
            }
            yp[r * wd + col] += acc;
          }
        }
      }
    }
  }
  check_finite(y, "conv2d");
  const bool rg = needs_grad(xv) || needs_grad(kv) || needs_grad(bv);
  return push(
      std::move(y), rg,
      [xv, kv, bv, batch, cin, cout, h, wd](Graph& g, const Node& self) {
        const Value& dy = self.grad;
        const Value& x = g.value(xv);
        const Value& k = g.value(kv);
        const bool need_x = g.needs_grad(xv), need_k = g.needs_grad(kv);
        Value* dx = need_x ? &g.grad_buffer(xv) : nullptr;
        Value* dk = need_k ? &g.grad_buffer(kv) : nullptr;
        if (g.needs_grad(bv)) {
          Value& db = g.grad_buffer(bv);
          for (std::size_t n = 0; n < batch; ++n) {
            for (std::size_t o = 0; o < cout; ++o) {
              const T* dyp = &dy[(n * cout + o) * h * wd];
              T acc = 0;
              for (std::size_t p = 0; p < h * wd; ++p) acc += dyp[p];
              db[o] += acc;
            }
          }
        }
        if (!need_x && !need_k) return;
        for (std::size_t n = 0; n < batch; ++n) {
          for (std::size_t o = 0; o < cout; ++o) {
            const T* dyp = &dy[(n * cout + o) * h * wd];
            for (std::size_t c = 0; c < cin; ++c) {
              const T* xp = &x[(n * cin + c) * h * wd];
              const T* kp = &k[(o * cin + c) * 9];
              T* dxp = need_x ? &(*dx)[(n * cin + c) * h * wd] : nullptr;
              T* dkp = need_k ? &(*dk)[(o * cin + c) * 9] : nullptr;
              for (std::size_t r = 0; r < h; ++r) {
                for (std::size_t col = 0; col < wd; ++col) {
                  const T d = dyp[r * wd + col];
                  for (int ky = -1; ky <= 1; ++ky) {
                    const std::ptrdiff_t rr =
                        static_cast<std::ptrdiff_t>(r) + ky;
                    if (rr < 0 || rr >= static_cast<std::ptrdiff_t>(h))
                      continue;
                    for (int kx = -1; kx <= 1; ++kx) {
                      const std::ptrdiff_t cc =
                          static_cast<std::ptrdiff_t>(col) + kx;
                      if (cc < 0 || cc >= static_cast<std::ptrdiff_t>(wd))
                        continue;
                      const std::size_t ki = (ky + 1) * 3 + (kx + 1);
                      if (dkp) dkp[ki] += d * xp[rr * wd + cc];
                      if (dxp) dxp[rr * wd + cc] += d * kp[ki];
                    }
                  }
                }
              }
            }
          }
        }
      });
}

template <class T>
Var Graph<T>::maxpool2d(Var xv) {
  const Value& x = value(xv);
  require_rank(x.shape(), 4, "maxpool2d input");
  const std::size_t batch = x.dim(0), ch = x.dim(1), h = x.dim(2),
                    wd = x.dim(3);
  if (h < 3 || wd < 3) {
    throw DimensionError("maxpool2d: spatial dims " + shape_string(x.shape()) +
                         " smaller than kernel 3");
  }
  const std::size_t ho = (h - 3) / 2 + 1, wo = (wd - 3) / 2 + 1;
  Value y(Shape{batch, ch, ho, wo});
  std::vector<std::size_t> argmax(y.numel());
  std::uint64_t sig = 0;
  for (std::size_t plane = 0; plane < batch * ch; ++plane) {
    const T* xp = &x[plane * h * wd];
    for (std::size_t r = 0; r < ho; ++r) {
      for (std::size_t c = 0; c < wo; ++c) {
        std::size_t best = (2 * r) * wd + 2 * c;
        for (std::size_t ky = 0; ky < 3; ++ky) {
          for (std::size_t kx = 0; kx < 3; ++kx) {
            const std::size_t idx = (2 * r + ky) * wd + (2 * c + kx);
            if (xp[idx] > xp[best]) best = idx;
          }
        }
        const std::size_t out = (plane * ho + r) * wo + c;
        y[out] = xp[best];
        argmax[out] = plane * h * wd + best;
        sig = sig * 31 + best;
      }
    }
  }
  mix_kink(sig);
  const bool rg = needs_grad(xv);
  return push(std::move(y), rg,
              [xv, argmax = std::move(argmax)](Graph& g, const Node& self) {
                Value& dx = g.grad_buffer(xv);
                for (std::size_t i = 0; i < argmax.size(); ++i) {
                  dx[argmax[i]] += self.grad[i];
                }
              });
}

template <class T>
Var Graph<T>::relu(Var xv) {
  const Value& x = value(xv);
  Value y(x.shape());
  std::uint64_t sig = 0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const bool on = x[i] > T{0};
    y[i] = on ? x[i] : T{0};
    sig = (sig << 1 | (sig >> 63)) ^ (on ? 0x9e37u + i : i);
  }
  mix_kink(sig);
  return push(std::move(y), needs_grad(xv), [xv](Graph& g, const Node& self) {
    const Value& x = g.value(xv);
    Value& dx = g.grad_buffer(xv);
    for (std::size_t i = 0; i < x.numel(); ++i) {
      if (x[i] > T{0}) dx[i] += self.grad[i];
    }
  });
}

template <class T>
Var Graph<T>::flatten(Var xv) {
  const Value& x = value(xv);
  if (x.rank() < 2) throw DimensionError("flatten: rank < 2");
  const std::size_t batch = x.dim(0);
  Value y = x.reshaped(Shape{batch, x.numel() / batch});
  return push(std::move(y), needs_grad(xv), [xv](Graph& g, const Node& self) {
    Value& dx = g.grad_buffer(xv);
    for (std::size_t i = 0; i < dx.numel(); ++i) dx[i] += self.grad[i];
  });
}

template <class T>
Var Graph<T>::batch_norm(Var xv, Var sv, Var hv, Parameter<T>* running_mean,
                         Parameter<T>* running_var, bool training,
                         const BatchNormSettings& settings) {
  const Value& x = value(xv);
  if (x.rank() != 2 && x.rank() != 4) {
    throw DimensionError("batch_norm: expected rank 2 or 4, got " +
                         shape_string(x.shape()));
  }
  const std::size_t batch = x.dim(0), ch = x.dim(1);
  const std::size_t inner = x.rank() == 4 ? x.dim(2) * x.dim(3) : 1;
  const Value& gamma = value(sv);
  const Value& beta = value(hv);
  if (gamma.numel() != ch || beta.numel() != ch) {
    throw DimensionError("batch_norm: scale/shift size mismatch with " +
                         shape_string(x.shape()));
  }
  const double m = static_cast<double>(batch * inner);
  std::vector<T> mean(ch), invstd(ch);
  if (training) {
    for (std::size_t c = 0; c < ch; ++c) {
      T sum = 0;
      for (std::size_t n = 0; n < batch; ++n) {
        const T* p = &x[(n * ch + c) * inner];
        for (std::size_t s = 0; s < inner; ++s) sum += p[s];
      }
      const T mu = sum / static_cast<T>(m);
      T sq = 0;
      for (std::size_t n = 0; n < batch; ++n) {
        const T* p = &x[(n * ch + c) * inner];
        for (std::size_t s = 0; s < inner; ++s) sq += (p[s] - mu) * (p[s] - mu);
      }
      const T var = sq / static_cast<T>(m);
      mean[c] = mu;
      invstd[c] = T{1} / std::sqrt(var + static_cast<T>(settings.epsilon));
      if (running_mean && running_var) {
        const T mom = static_cast<T>(settings.momentum);
        const T unbiased = m > 1 ? sq / static_cast<T>(m - 1) : var;
        running_mean->value[c] =
            (T{1} - mom) * running_mean->value[c] + mom * mu;
        running_var->value[c] =
            (T{1} - mom) * running_var->value[c] + mom * unbiased;
      }
    }
  } else {
    if (!running_mean || !running_var) {
      throw UsageError("batch_norm: evaluation mode needs running statistics");
    }
    for (std::size_t c = 0; c < ch; ++c) {
      mean[c] = running_mean->value[c];
      invstd[c] = T{1} / std::sqrt(running_var->value[c] +
                                   static_cast<T>(settings.epsilon));
    }
  }
  Value xhat(x.shape());
  Value y(x.shape());
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < ch; ++c) {
      const std::size_t base = (n * ch + c) * inner;
      for (std::size_t s = 0; s < inner; ++s) {
        const T xh = (x[base + s] - mean[c]) * invstd[c];
        xhat[base + s] = xh;
        y[base + s] = gamma[c] * xh + beta[c];
      }
    }
  }
  check_finite(y, "batch_norm");
  const bool rg = needs_grad(xv) || needs_grad(sv) || needs_grad(hv);
  return push(
      std::move(y), rg,
      [xv, sv, hv, batch, ch, inner, m, training, invstd = std::move(invstd),
       xhat = std::move(xhat)](Graph& g, const Node& self) {
        const Value& dy = self.grad;
        const Value& gamma = g.value(sv);
        std::vector<T> sum_dy(ch, T{0}), sum_dy_xhat(ch, T{0});
        for (std::size_t n = 0; n < batch; ++n) {
          for (std::size_t c = 0; c < ch; ++c) {
            const std::size_t base = (n * ch + c) * inner;
            for (std::size_t s = 0; s < inner; ++s) {
              sum_dy[c] += dy[base + s];
              sum_dy_xhat[c] += dy[base + s] * xhat[base + s];
            }
          }
        }
        if (g.needs_grad(sv)) {
          Value& ds = g.grad_buffer(sv);
          for (std::size_t c = 0; c < ch; ++c) ds[c] += sum_dy_xhat[c];
        }
        if (g.needs_grad(hv)) {
          Value& dh = g.grad_buffer(hv);
          for (std::size_t c = 0; c < ch; ++c) dh[c] += sum_dy[c];
        }
        if (!g.needs_grad(xv)) return;
        Value& dx = g.grad_buffer(xv);
        const T mt = static_cast<T>(m);
        for (std::size_t n = 0; n < batch; ++n) {
          for (std::size_t c = 0; c < ch; ++c) {
            const std::size_t base = (n * ch + c) * inner;
            const T gi = gamma[c] * invstd[c];
            for (std::size_t s = 0; s < inner; ++s) {
              if (training) {
                dx[base + s] += gi * (dy[base + s] - sum_dy[c] / mt -
                                      xhat[base + s] * sum_dy_xhat[c] / mt);
              } else {
                dx[base + s] += gi * dy[base + s];
              }
            }
          }
        }
      });
}

template <class T>
Var Graph<T>::softmax(Var xv, double temperature) {
  if (!(temperature > 0.0)) {
    throw ParameterError("softmax: temperature must be positive, got " +
                         std::to_string(temperature));
  }
  const Value& x = value(xv);
  require_rank(x.shape(), 2, "softmax");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  const T inv_tau = static_cast<T>(1.0 / temperature);
  Value y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = &x[r * cols];
    T* yr = &y[r * cols];
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, xr[c] * inv_tau);
    T sum = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] * inv_tau - mx);
      sum += yr[c];
    }
    for (std::size_t c = 0; c < cols; ++c) yr[c] /= sum;
  }
  check_finite(y, "softmax");
  return push(std::move(y), needs_grad(xv),
              [xv, rows, cols, inv_tau](Graph& g, const Node& self) {
                const Value& y = self.value;
                const Value& dy = self.grad;
                Value& dx = g.grad_buffer(xv);
                // The Jacobian ignores a constant shift of dy; shifting by
                // the row's first entry makes a constant dy give exact zeros.
                for (std::size_t r = 0; r < rows; ++r) {
                  const T base = dy[r * cols];
                  T dot = 0;
                  for (std::size_t c = 0; c < cols; ++c) {
                    dot += (dy[r * cols + c] - base) * y[r * cols + c];
                  }
                  for (std::size_t c = 0; c < cols; ++c) {
                    const std::size_t i = r * cols + c;
                    dx[i] += inv_tau * y[i] * ((dy[i] - base) - dot);
                  }
                }
              });
}

template <class T>
Var Graph<T>::cross_entropy(Var pv, std::span<const int> labels) {
  const Value& p = value(pv);
  require_rank(p.shape(), 2, "cross_entropy");
  const std::size_t rows = p.dim(0), cols = p.dim(1);
  if (labels.size() != rows) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(rows) + " rows");
  }
  const T floor = static_cast<T>(kProbabilityFloor);
  std::vector<int> lab(labels.begin(), labels.end());
  T total = 0;
  std::uint64_t sig = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (lab[r] < 0 || static_cast<std::size_t>(lab[r]) >= cols) {
      throw IndexError("cross_entropy: label " + std::to_string(lab[r]) +
                       " out of range for " + std::to_string(cols) +
                       " classes");
    }
    const T q = p[r * cols + lab[r]];
    sig = sig * 3 + (q > floor ? 1 : 2);
    total += -std::log(std::max(q, floor));
  }
  mix_kink(sig);
  Value y = Value::scalar(total / static_cast<T>(rows));
  check_finite(y, "cross_entropy");
  return push(std::move(y), needs_grad(pv),
              [pv, rows, cols, floor, lab = std::move(lab)](Graph& g,
                                                            const Node& self) {
                const Value& p = g.value(pv);
                Value& dp = g.grad_buffer(pv);
                const T scale = self.grad[0] / static_cast<T>(rows);
                for (std::size_t r = 0; r < rows; ++r) {
                  const std::size_t i = r * cols + lab[r];
                  if (p[i] > floor) dp[i] += -scale / p[i];
                }
              });
}

namespace {

// Row-wise log(softmax(x * scale)).
template <class T>
void log_softmax_rows(const BasicTensor<T>& x, T scale, BasicTensor<T>& out) {
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = &x[r * cols];
    T* o = &out[r * cols];
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, xr[c] * scale);
    T sum = 0;
    for (std::size_t c = 0; c < cols; ++c) sum += std::exp(xr[c] * scale - mx);
    const T lse = mx + std::log(sum);
    for (std::size_t c = 0; c < cols; ++c) o[c] = xr[c] * scale - lse;
  }
}

}  // namespace

template <class T>
Var Graph<T>::softmax_cross_entropy(Var zv, std::span<const int> labels) {
  const Value& z = value(zv);
  require_rank(z.shape(), 2, "softmax_cross_entropy");
  const std::size_t rows = z.dim(0), cols = z.dim(1);
  if (labels.size() != rows) {
    throw DimensionError(
        "softmax_cross_entropy: " + std::to_string(labels.size()) +
        " labels for " + std::to_string(rows) + " rows");
  }
  std::vector<int> lab(labels.begin(), labels.end());
  Value logp(z.shape());
  log_softmax_rows(z, T{1}, logp);
  T total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (lab[r] < 0 || static_cast<std::size_t>(lab[r]) >= cols) {
      throw IndexError("softmax_cross_entropy: label " +
                       std::to_string(lab[r]) + " out of range for " +
                       std::to_string(cols) + " classes");
    }
    total -= logp[r * cols + lab[r]];
  }
  Value y = Value::scalar(total / static_cast<T>(rows));
  check_finite(y, "softmax_cross_entropy");
  return push(std::move(y), needs_grad(zv),
              [zv, rows, cols, lab = std::move(lab), logp = std::move(logp)](
                  Graph& g, const Node& self) {
                Value& dz = g.grad_buffer(zv);
                const T scale = self.grad[0] / static_cast<T>(rows);
                for (std::size_t r = 0; r < rows; ++r) {
                  for (std::size_t c = 0; c < cols; ++c) {
                    const std::size_t i = r * cols + c;
                    const T onehot =
                        static_cast<int>(c) == lab[r] ? T{1} : T{0};
                    dz[i] += scale * (std::exp(logp[i]) - onehot);
                  }
                }
              });
}

template <class T>
Var Graph<T>::softmax_kl(Var sv, Var tv, double temperature) {
  if (!(temperature > 0.0)) {
    throw ParameterError("softmax_kl: temperature must be positive, got " +
                         std::to_string(temperature));
  }
  const Value& s = value(sv);
  const Value& t = value(tv);
  require_rank(s.shape(), 2, "softmax_kl student");
  if (s.shape() != t.shape()) {
    throw DimensionError("softmax_kl: shapes " + shape_string(s.shape()) +
                         " and " + shape_string(t.shape()) + " differ");
  }
  const std::size_t rows = s.dim(0), cols = s.dim(1);
  const T inv_tau = static_cast<T>(1.0 / temperature);
  Value ls(s.shape()), lt(t.shape());
  log_softmax_rows(s, inv_tau, ls);
  log_softmax_rows(t, inv_tau, lt);
  T total = 0;
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const T pt = std::exp(lt[i]);
    if (pt > T{0}) total += pt * (lt[i] - ls[i]);
  }
  const T tau = static_cast<T>(temperature);
  Value y = Value::scalar(tau * tau * total / static_cast<T>(rows));
  check_finite(y, "softmax_kl");
  const bool rg = needs_grad(sv) || needs_grad(tv);
  return push(std::move(y), rg,
              [sv, tv, rows, cols, tau, ls = std::move(ls), lt = std::move(lt)](
                  Graph& g, const Node& self) {
                const T scale = self.grad[0] * tau / static_cast<T>(rows);
                if (g.needs_grad(sv)) {
                  Value& ds = g.grad_buffer(sv);
                  for (std::size_t i = 0; i < rows * cols; ++i) {
                    ds[i] += scale * (std::exp(ls[i]) - std::exp(lt[i]));
                  }
                }
                if (g.needs_grad(tv)) {
                  Value& dt = g.grad_buffer(tv);
                  for (std::size_t r = 0; r < rows; ++r) {
                    T mean = 0;
                    for (std::size_t c = 0; c < cols; ++c) {
                      const std::size_t i = r * cols + c;
                      mean += std::exp(lt[i]) * (lt[i] - ls[i]);
                    }
                    for (std::size_t c = 0; c < cols; ++c) {
                      const std::size_t i = r * cols + c;
                      dt[i] +=
                          scale * std::exp(lt[i]) * ((lt[i] - ls[i]) - mean);
                    }
                  }
                }
              });
}

template <class T>
Var Graph<T>::kl_divergence(Var sv, Var tv) {
  const Value& s = value(sv);
  const Value& t = value(tv);
  require_rank(s.shape(), 2, "kl_divergence source");
  if (s.shape() != t.shape()) {
    throw DimensionError("kl_divergence: shapes " + shape_string(s.shape()) +
                         " and " + shape_string(t.shape()) + " differ");
  }
  const std::size_t rows = s.dim(0), cols = s.dim(1);
  const T floor = static_cast<T>(kProbabilityFloor);
  T total = 0;
  std::uint64_t sig = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    T row = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (s[i] < T{0} || t[i] < T{0}) {
        throw DomainError("kl_divergence: negative probability entry");
      }
      const T ls = std::log(std::max(s[i], floor));
      const T lt = std::log(std::max(t[i], floor));
      row += t[i] * (lt - ls);
      sig = sig * 5 + (s[i] > floor ? 1 : 2) + (t[i] > floor ? 0 : 2);
    }
    total += row;
  }
  mix_kink(sig);
  Value y = Value::scalar(total / static_cast<T>(rows));
  check_finite(y, "kl_divergence");
  const bool rg = needs_grad(sv) || needs_grad(tv);
  return push(std::move(y), rg,
              [sv, tv, rows, cols, floor](Graph& g, const Node& self) {
                const Value& s = g.value(sv);
                const Value& t = g.value(tv);
                const T scale = self.grad[0] / static_cast<T>(rows);
                if (g.needs_grad(sv)) {
                  Value& ds = g.grad_buffer(sv);
                  for (std::size_t i = 0; i < rows * cols; ++i) {
                    if (s[i] > floor) ds[i] += -scale * (t[i] / s[i]);
                  }
                }
                if (g.needs_grad(tv)) {
                  Value& dt = g.grad_buffer(tv);
                  for (std::size_t i = 0; i < rows * cols; ++i) {
                    const T ls = std::log(std::max(s[i], floor));
                    const T lt = std::log(std::max(t[i], floor));
                    dt[i] += scale * (lt - ls + (t[i] > floor ? T{1} : T{0}));
                  }
                }
              });
}

template <class T>
Var Graph<T>::mean_squared_error(Var xv, Var tv) {
  const Value& x = value(xv);
  const Value& t = value(tv);
  if (x.shape() != t.shape()) {
    throw DimensionError("mean_squared_error: shapes " +
                         shape_string(x.shape()) + " and " +
                         shape_string(t.shape()) + " differ");
  }
  T total = 0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    total += (x[i] - t[i]) * (x[i] - t[i]);
  }
  const std::size_t n = x.numel();
  Value y = Value::scalar(total / static_cast<T>(n));
  check_finite(y, "mean_squared_error");
  const bool rg = needs_grad(xv) || needs_grad(tv);
  return push(std::move(y), rg, [xv, tv, n](Graph& g, const Node& self) {
    const Value& x = g.value(xv);
    const Value& t = g.value(tv);
    const T scale = T{2} * self.grad[0] / static_cast<T>(n);
    if (g.needs_grad(xv)) {
      Value& dx = g.grad_buffer(xv);
      for (std::size_t i = 0; i < n; ++i) dx[i] += scale * (x[i] - t[i]);
    }
    if (g.needs_grad(tv)) {
      Value& dt = g.grad_buffer(tv);
      for (std::size_t i = 0; i < n; ++i) dt[i] -= scale * (x[i] - t[i]);
    }
  });
}

template <class T>
Var Graph<T>::sum_squares(Var xv) {
  const Value& x = value(xv);
  T total = 0;
  for (std::size_t i = 0; i < x.numel(); ++i) total += x[i] * x[i];
  Value y = Value::scalar(total);
  check_finite(y, "sum_squares");
  return push(std::move(y), needs_grad(xv), [xv](Graph& g, const Node& self) {
    const Value& x = g.value(xv);
    Value& dx = g.grad_buffer(xv);
    for (std::size_t i = 0; i < x.numel(); ++i) {
      dx[i] += T{2} * self.grad[0] * x[i];
    }
  });
}

template <class T>
Var Graph<T>::scale(Var xv, double factor) {
  const Value& x = value(xv);
  const T f = static_cast<T>(factor);
  Value y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = f * x[i];
  check_finite(y, "scale");
  return push(std::move(y), needs_grad(xv),
              [xv, f](Graph& g, const Node& self) {
                Value& dx = g.grad_buffer(xv);
                for (std::size_t i = 0; i < dx.numel(); ++i)
                  dx[i] += f * self.grad[i];
              });
}

template <class T>
Var Graph<T>::add(Var av, Var bv) {
  const Value& a = value(av);
  const Value& b = value(bv);
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
  Value y(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) y[i] = a[i] + b[i];
  check_finite(y, "add");
  const bool rg = needs_grad(av) || needs_grad(bv);
  return push(std::move(y), rg, [av, bv](Graph& g, const Node& self) {
    if (g.needs_grad(av)) {
      Value& da = g.grad_buffer(av);
      for (std::size_t i = 0; i < da.numel(); ++i) da[i] += self.grad[i];
    }
    if (g.needs_grad(bv)) {
      Value& db = g.grad_buffer(bv);
      for (std::size_t i = 0; i < db.numel(); ++i) db[i] += self.grad[i];
    }
  });
}

template <class T>
void Graph<T>::backward(Var loss) {
  if (loss.index >= nodes_.size()) throw UsageError("backward: unknown node");
  if (nodes_[loss.index].value.numel() != 1) {
    throw UsageError("backward: loss must be scalar, got shape " +
                     shape_string(nodes_[loss.index].value.shape()));
  }
  if (backward_done_) throw UsageError("backward: graph already consumed");
  backward_done_ = true;
  if (!nodes_[loss.index].requires_grad) return;
  grad_buffer(loss)[0] = T{1};
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || node.grad.numel() == 0) continue;
    if (node.backward) node.backward(*this, node);
    if (node.param) {
      auto& pg = node.param->grad;
      for (std::size_t k = 0; k < pg.numel(); ++k) pg[k] += node.grad[k];
    }
  }
}

template <class T>
bool bit_equal(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return a.shape() == b.shape() &&
         (a.numel() == 0 || std::memcmp(a.data().data(), b.data().data(),
                                        a.numel() * sizeof(T)) == 0);
}

template <class T>
bool bit_equal(const BasicParameterSet<T>& a, const BasicParameterSet<T>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || a[i].trainable != b[i].trainable ||
        !bit_equal(a[i].value, b[i].value)) {
      return false;
    }
  }
  return true;
}

template class Graph<float>;
template class Graph<double>;
template bool bit_equal(const BasicTensor<float>&, const BasicTensor<float>&);
template bool bit_equal(const BasicTensor<double>&, const BasicTensor<double>&);
template bool bit_equal(const BasicParameterSet<float>&,
                        const BasicParameterSet<float>&);
template bool bit_equal(const BasicParameterSet<double>&,
                        const BasicParameterSet<double>&);

}  // namespace takd::ad
