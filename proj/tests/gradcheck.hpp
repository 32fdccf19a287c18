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

// Central-difference gradient checks over randomly generated op graphs.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "layeranat/autograd.hpp"
#include "layeranat/rng.hpp"

namespace gradcheck {

using layeranat::Rng;
using layeranat::Shape;
using layeranat::Tensor;
using DVar = layeranat::ag::Var<double>;

struct Result {
  std::string op;
  double max_rel_error = 0.0;
  std::size_t inputs = 0;
};

// Graph builder: leaves -> scalar loss.
using Graph = std::function<DVar(const std::vector<DVar>&)>;

inline Tensor<double> random_tensor(Rng& rng, Shape s, double scale = 1.0) {
  Tensor<double> t(std::move(s));
  for (auto& v : t.vec()) v = rng.normal(0.0, scale);
  return t;
}

// Norm-wise relative error per input: ||analytic - numeric|| / max(||analytic||, ||numeric||).
inline double check(const Graph& g, const std::vector<Tensor<double>>& inputs, double h = 1e-3) {
  namespace ag = layeranat::ag;
  std::vector<DVar> leaves;
  for (const auto& t : inputs) leaves.push_back(ag::leaf(t));
  const DVar loss = g(leaves);
  ag::backward(loss);

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Tensor<double> analytic =
        leaves[i].has_grad() ? leaves[i].grad() : Tensor<double>(inputs[i].shape());
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t j = 0; j < inputs[i].numel(); ++j) {
      auto eval_at = [&](double delta) {
        layeranat::ag::NoGradGuard guard;
        std::vector<DVar> probe;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          Tensor<double> t = inputs[k];
          if (k == i) t[j] += delta;
          probe.push_back(ag::constant(std::move(t)));
        }
        return g(probe).value()[0];
      };
      const double numeric = (eval_at(h) - eval_at(-h)) / (2.0 * h);
      const double a = analytic[j];
      diff += (a - numeric) * (a - numeric);
      na += a * a;
      nn += numeric * numeric;
    }
    const double denom = std::max(std::sqrt(na), std::sqrt(nn));
    if (denom > 0.0) worst = std::max(worst, std::sqrt(diff) / denom);
  }
  return worst;
}

// Projects a tensor-valued op onto a fixed random direction so every output
// entry contributes to the scalar loss.
inline DVar project(const DVar& out, const Tensor<double>& dir) {
  namespace ag = layeranat::ag;
  return ag::sum(ag::mul(out, ag::constant(dir)));
}

inline constexpr const char* kOps[] = {"matmul",    "add",       "mul",
                                       "scale",     "softmax",   "layer_norm",
                                       "gelu",      "embedding", "causal_attention",
                                       "cross_entropy", "mlp_block"};
inline constexpr std::size_t kOpCount = sizeof(kOps) / sizeof(kOps[0]);

// Builds and checks one random graph of the given op kind.
inline Result random_graph(std::size_t kind, std::uint64_t seed) {
  namespace ag = layeranat::ag;
  Rng rng(seed);
  const std::size_t r = 2 + rng.below(4), c = 2 + rng.below(5), k = 2 + rng.below(4);
  Result res;
  res.op = kOps[kind % kOpCount];
  std::vector<Tensor<double>> in;
  Graph g;
  switch (kind % kOpCount) {
    case 0: {
      in = {random_tensor(rng, {r, k}), random_tensor(rng, {k, c})};
      auto dir = random_tensor(rng, {r, c});
      g = [dir](const std::vector<DVar>& v) { return project(ag::matmul(v[0], v[1]), dir); };
      break;
    }
    case 1: {
      in = {random_tensor(rng, {r, c}), random_tensor(rng, {r, c})};
      auto dir = random_tensor(rng, {r, c});
      g = [dir](const std::vector<DVar>& v) { return project(ag::add(v[0], v[1]), dir); };
      break;
    }
    case 2: {
      in = {random_tensor(rng, {r, c}), random_tensor(rng, {r, c})};
      auto dir = random_tensor(rng, {r, c});
      g = [dir](const std::vector<DVar>& v) { return project(ag::mul(v[0], v[1]), dir); };
      break;
    }
    case 3: {
      in = {random_tensor(rng, {r, c})};
      const double s = rng.normal(0.0, 2.0);
      auto dir = random_tensor(rng, {r, c});
      g = [dir, s](const std::vector<DVar>& v) { return project(ag::scale(v[0], s), dir); };
      break;
    }
    case 4: {
      in = {random_tensor(rng, {r, c}, 2.0)};
      auto dir = random_tensor(rng, {r, c});
      g = [dir](const std::vector<DVar>& v) { return project(ag::softmax_rows(v[0]), dir); };
      break;
    }
    case 5: {
      const std::size_t n = c + 2;
      in = {random_tensor(rng, {r, n}), random_tensor(rng, {n}), random_tensor(rng, {n})};
      auto dir = random_tensor(rng, {r, n});
      g = [dir](const std::vector<DVar>& v) {
        return project(ag::layer_norm(v[0], v[1], v[2]), dir);
      };
      break;
    }
    case 6: {
      in = {random_tensor(rng, {r, c}, 1.5)};
      auto dir = random_tensor(rng, {r, c});
      g = [dir](const std::vector<DVar>& v) { return project(ag::gelu(v[0]), dir); };
      break;
    }
    case 7: {
      const std::size_t vocab = 3 + rng.below(5);
      std::vector<int> ids(r + 2);
      for (auto& id : ids) id = static_cast<int>(rng.below(vocab));
      in = {random_tensor(rng, {vocab, c})};
      auto dir = random_tensor(rng, {ids.size(), c});
      g = [dir, ids](const std::vector<DVar>& v) {
        return project(ag::embedding(v[0], std::span<const int>(ids)), dir);
      };
      break;
    }
    case 8: {
      const std::size_t batch = 1 + rng.below(2), seq = 2 + rng.below(3), heads = 1 + rng.below(2);
      const std::size_t d = heads * (1 + rng.below(3));
      for (int i = 0; i < 3; ++i) in.push_back(random_tensor(rng, {batch * seq, d}));
      auto dir = random_tensor(rng, {batch * seq, d});
      g = [dir, batch, seq, heads](const std::vector<DVar>& v) {
        return project(ag::causal_attention(v[0], v[1], v[2], batch, seq, heads), dir);
      };
      break;
    }
    case 9: {
      std::vector<int> targets(r);
      for (auto& t : targets) t = static_cast<int>(rng.below(c));
      targets[0] = -1;  // ignored position
      in = {random_tensor(rng, {r, c}, 2.0)};
      g = [targets](const std::vector<DVar>& v) {
        return ag::cross_entropy(v[0], std::span<const int>(targets), -1);
      };
      break;
    }
    default: {
      // Composite: LN -> matmul -> GELU -> matmul -> residual -> softmax.
      const std::size_t d = c + 1, f = 2 * d;
      in = {random_tensor(rng, {r, d}), random_tensor(rng, {d}), random_tensor(rng, {d}),
            random_tensor(rng, {d, f}, 0.5), random_tensor(rng, {f, d}, 0.5)};
      auto dir = random_tensor(rng, {r, d});
      g = [dir](const std::vector<DVar>& v) {
        auto h = ag::layer_norm(v[0], v[1], v[2]);
        auto m = ag::matmul(ag::gelu(ag::matmul(h, v[3])), v[4]);
        return project(ag::softmax_rows(ag::add(v[0], m)), dir);
      };
      break;
    }
  }
  res.inputs = in.size();
  res.max_rel_error = check(g, in);
  return res;
}

}  // namespace gradcheck
