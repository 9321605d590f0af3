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
#include <optional>
#include <string>
#include <vector>

#include "takd/tensor.hpp"

namespace takd::ad {

// One named tensor with its gradient and momentum buffers. Non-trainable
// entries (batch-norm running statistics) ride along for serialization and
// evaluation but are skipped by the optimizer and by capacity counts.
template <class T>
struct Parameter {
  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;
  BasicTensor<T> velocity;
  bool trainable = true;
};

template <class T>
class BasicParameterSet {
 public:
  Parameter<T>& add(std::string name, BasicTensor<T> value,
                    bool trainable = true) {
    Parameter<T> p;
    p.name = std::move(name);
    p.grad = BasicTensor<T>(value.shape());
    p.velocity = BasicTensor<T>(value.shape());
    p.value = std::move(value);
    p.trainable = trainable;
    entries_.push_back(std::move(p));
    return entries_.back();
  }

  std::size_t size() const { return entries_.size(); }
  Parameter<T>& operator[](std::size_t i) { return entries_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return entries_[i]; }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].name == name) return i;
    }
    return std::nullopt;
  }

  void zero_grad() {
    for (auto& p : entries_) p.grad.fill(T{0});
  }

  std::size_t trainable_count() const {
    std::size_t n = 0;
    for (const auto& p : entries_) {
      if (p.trainable) n += p.value.numel();
    }
    return n;
  }

  template <class U>
  BasicParameterSet<U> cast() const {
    BasicParameterSet<U> out;
    for (const auto& p : entries_) {
      auto& q = out.add(p.name, p.value.template cast<U>(), p.trainable);
      q.grad = p.grad.template cast<U>();
      q.velocity = p.velocity.template cast<U>();
    }
    return out;
  }

  // Values only; gradients and velocities are scratch state.
  bool same_values(const BasicParameterSet& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& a = entries_[i];
      const auto& b = other.entries_[i];
      if (a.name != b.name || a.trainable != b.trainable ||
          !(a.value == b.value)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Parameter<T>> entries_;
};

using ParameterSet = BasicParameterSet<float>;

}  // namespace takd::ad
