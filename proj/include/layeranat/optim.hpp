/* Copyright 2026 The layeranat Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "layeranat/error.hpp"
#include "layeranat/tensor.hpp"

namespace layeranat {

// Global L2 norm over all grads; rescales them in place when it exceeds
// max_norm. Returns the pre-clip norm.
template <typename T>
double clip_grad_norm(std::span<Tensor<T>* const> grads, double max_norm) {
  double ss = 0.0;
  for (const Tensor<T>* g : grads) {
    if (!g) continue;
    for (T v : g->data()) ss += static_cast<double>(v) * static_cast<double>(v);
  }
  const double norm = std::sqrt(ss);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (Tensor<T>* g : grads) {
      if (!g) continue;
      for (T& v : g->vec()) v = static_cast<T>(v * s);
    }
  }
  return norm;
}

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// AdamW with decoupled weight decay. Bias correction uses a per-parameter
// step count so a parameter that joins training late (or is re-initialized)
// starts with properly corrected moments, and frozen parameters keep their
// whole state untouched.
template <typename T>
class AdamW {
 public:
  struct Slot {
    Tensor<T> m;
    Tensor<T> v;
    long steps = 0;
  };

  AdamW(AdamWConfig config, const std::vector<Shape>& shapes)
      : config_(config) {
    slots_.reserve(shapes.size());
    for (const auto& s : shapes) slots_.push_back({Tensor<T>(s), Tensor<T>(s), 0});
  }

  // grads[i] == nullptr marks parameter i as frozen for this step.
  void step(std::span<Tensor<T>* const> params,
            std::span<const Tensor<T>* const> grads) {
    if (params.size() != slots_.size() || grads.size() != slots_.size()) {
      throw ShapeError("adamw_step: optimizer holds " +
                       std::to_string(slots_.size()) + " slots, got " +
                       std::to_string(params.size()) + " params / " +
                       std::to_string(grads.size()) + " grads");
    }
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (!grads[i]) continue;
      if (params[i]->shape() != slots_[i].m.shape() ||
          grads[i]->shape() != slots_[i].m.shape()) {
        throw ShapeError("adamw_step: parameter " + std::to_string(i) +
                         " shape " + shape_str(params[i]->shape()) +
                         " vs state " + shape_str(slots_[i].m.shape()));
      }
      update(*params[i], *grads[i], slots_[i]);
    }
    ++step_count_;
  }

  void reset_slot(std::size_t i) {
    auto& s = slots_.at(i);
    s.m.fill(T{0});
    s.v.fill(T{0});
    s.steps = 0;
  }

  const Slot& slot(std::size_t i) const { return slots_.at(i); }
  std::size_t size() const { return slots_.size(); }
  long step_count() const { return step_count_; }
  const AdamWConfig& config() const { return config_; }

 private:
  void update(Tensor<T>& p, const Tensor<T>& g, Slot& s) {
    ++s.steps;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(s.steps));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(s.steps));
    const double decay = 1.0 - config_.lr * config_.weight_decay;
    for (std::size_t j = 0; j < p.numel(); ++j) {
      const double gj = g[j];
      const double m = b1 * s.m[j] + (1.0 - b1) * gj;
      const double v = b2 * s.v[j] + (1.0 - b2) * gj * gj;
      s.m[j] = static_cast<T>(m);
      s.v[j] = static_cast<T>(v);
      const double mhat = m / c1;
      const double vhat = v / c2;
      const double w = static_cast<double>(p[j]) * decay;
      p[j] = static_cast<T>(w - config_.lr * mhat / (std::sqrt(vhat) + config_.eps));
    }
  }

  AdamWConfig config_;
  std::vector<Slot> slots_;
  long step_count_ = 0;
};

}  // namespace layeranat
