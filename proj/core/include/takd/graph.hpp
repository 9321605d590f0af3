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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "takd/parameters.hpp"
#include "takd/tensor.hpp"

namespace takd::ad {

// Probabilities are clamped to this floor before any logarithm.
inline constexpr double kProbabilityFloor = 1e-12;

struct BatchNormSettings {
  double epsilon = 1e-5;
  double momentum = 0.1;
};

// Handle to a node of a Graph. Only meaningful for the graph that made it.
struct Var {
  std::size_t index = 0;
};

// Tape-based reverse-mode differentiation.
//
// Nodes are appended in evaluation order; backward() walks them in reverse
// and every accumulation loop runs in a fixed order, so two identical
// programs produce bit-identical gradients. Any non-finite forward value
// raises NumericError at the op that produced it.
//
// The graph also folds every non-differentiable branch decision (relu sign,
// max-pool argmax, probability clamping) into kink_signature(). Gradient
// checks use it to detect finite-difference probes that straddle a kink.
template <class T>
class Graph {
 public:
  using Value = BasicTensor<T>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var input(Value value);
  Var parameter(Parameter<T>& param);

  const Value& value(Var v) const { return nodes_[v.index].value; }
  const Value& grad(Var v) const { return nodes_[v.index].grad; }
  std::size_t size() const { return nodes_.size(); }
  std::uint64_t kink_signature() const { return kink_signature_; }

  // [batch x in] . [out x in]^T + [out]
  Var dense(Var x, Var weights, Var bias);
  // 3x3 cross-correlation, zero padding 1: [B x C x H x W] -> [B x O x H x W].
  Var conv2d(Var x, Var kernels, Var bias);
  // Kernel 3, stride 2, no padding. Gradient goes to the first row-major
  // argmax of each window.
  Var maxpool2d(Var x);
  Var relu(Var x);
  Var flatten(Var x);
  // Per-feature (rank 2) or per-channel (rank 4) normalization followed by
  // a learnable scale and shift. In training mode uses batch statistics and,
  // when the running buffers are given, updates them; otherwise normalizes
  // with the running buffers.
  Var batch_norm(Var x, Var scale, Var shift, Parameter<T>* running_mean,
                 Parameter<T>* running_var, bool training,
                 const BatchNormSettings& settings = {});

  // Row-wise softmax(logits / temperature) with max subtraction.
  Var softmax(Var logits, double temperature);
  // Mean over rows of -ln p[label].
  Var cross_entropy(Var probabilities, std::span<const int> labels);
  // Mean over rows of sum_c target * (ln target - ln source).
  Var kl_divergence(Var source, Var target);
  // Mean over rows of logsumexp(z) - z[label], the cross-entropy of
  // softmax(z), taken from the logits directly with no probability clamp.
  Var softmax_cross_entropy(Var logits, std::span<const int> labels);
  // tau^2 * mean over rows of KL(softmax(t / tau) || softmax(s / tau)) from
  // the logits. The student gradient is tau * (p_s - p_t) / rows, exactly
  // zero when the two logit rows are equal.
  Var softmax_kl(Var student_logits, Var teacher_logits, double temperature);
  // Mean over all entries of (x - target)^2.
  Var mean_squared_error(Var x, Var target);
  Var sum_squares(Var x);
  Var scale(Var x, double factor);
  Var add(Var a, Var b);

  // Seeds d(loss)/d(loss) = 1 and propagates. Parameter leaves accumulate
  // into Parameter::grad (added, not overwritten).
  void backward(Var loss);

 private:
  struct Node {
    Value value;
    Value grad;
    std::function<void(Graph&, const Node&)> backward;
    Parameter<T>* param = nullptr;
    bool requires_grad = false;
  };

  Var push(Value value, bool requires_grad,
           std::function<void(Graph&, const Node&)> backward);
  Value& grad_buffer(Var v);
  bool needs_grad(Var v) const { return nodes_[v.index].requires_grad; }
  void mix_kink(std::uint64_t bits);

  std::vector<Node> nodes_;
  std::uint64_t kink_signature_ = 0x6a09e667f3bcc909ULL;
  bool backward_done_ = false;
};

template <class T>
bool bit_equal(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <class T>
bool bit_equal(const BasicParameterSet<T>& a, const BasicParameterSet<T>& b);

}  // namespace takd::ad
