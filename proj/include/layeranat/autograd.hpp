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

// Reverse-mode automatic differentiation over dense tensors.
//
// A Var is a handle to a graph node. Ops record their parents and a backward
// rule only when gradient recording is enabled (see NoGradGuard) and at least
// one input requires a gradient, so frozen subgraphs cost nothing in backward.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "layeranat/error.hpp"
#include "layeranat/tensor.hpp"

namespace layeranat::ag {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}

// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() : prev_(grad_mode()) { grad_mode() = false; }
  ~NoGradGuard() { grad_mode() = prev_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor<T>& grad_buffer() {
    if (grad.empty()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  const Tensor<T>& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }

  // Gradient after backward(); zeros if nothing reached this node.
  Tensor<T> grad() const {
    return node_->grad.empty() ? Tensor<T>(node_->value.shape()) : node_->grad;
  }
  bool has_grad() const { return !node_->grad.empty(); }
  void zero_grad() { node_->grad = Tensor<T>(); }

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

template <typename T>
Var<T> leaf(Tensor<T> value, bool requires_grad = true) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return Var<T>(std::move(n));
}

template <typename T>
Var<T> constant(Tensor<T> value) {
  return leaf(std::move(value), false);
}

namespace detail {

template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> inputs,
                   std::function<void(Node<T>&)> backward_fn) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  if (needs && grad_mode()) {
    n->requires_grad = true;
    for (auto& in : inputs) n->parents.push_back(in.ptr());
    n->backward_fn = std::move(backward_fn);
  }
  return Var<T>(std::move(n));
}

inline void require(bool ok, const std::string& op, const std::string& msg) {
  if (!ok) throw ShapeError(op + ": " + msg);
}

inline std::string two_shapes(const Shape& a, const Shape& b) {
  return shape_str(a) + " vs " + shape_str(b);
}

}  // namespace detail

// [m,k] x [k,n] -> [m,n]
template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  const auto& as = a.shape();
  const auto& bs = b.shape();
  detail::require(as.size() == 2 && bs.size() == 2 && as[1] == bs[0], "matmul",
                  "incompatible shapes " + detail::two_shapes(as, bs));
  const auto m = static_cast<Eigen::Index>(as[0]);
  const auto k = static_cast<Eigen::Index>(as[1]);
  const auto n = static_cast<Eigen::Index>(bs[1]);
  Tensor<T> out({as[0], bs[1]});
  MatMap<T>(out.raw(), m, n).noalias() =
      ConstMatMap<T>(a.value().raw(), m, k) * ConstMatMap<T>(b.value().raw(), k, n);
  return detail::make_result<T>(
      std::move(out), {a, b}, [m, k, n](Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        ConstMatMap<T> g(self.grad.raw(), m, n);
        if (pa.requires_grad) {
          MatMap<T>(pa.grad_buffer().raw(), m, k).noalias() +=
              g * ConstMatMap<T>(pb.value.raw(), k, n).transpose();
        }
        if (pb.requires_grad) {
          MatMap<T>(pb.grad_buffer().raw(), k, n).noalias() +=
              ConstMatMap<T>(pa.value.raw(), m, k).transpose() * g;
        }
      });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  detail::require(a.shape() == b.shape(), "add",
                  "shape mismatch " + detail::two_shapes(a.shape(), b.shape()));
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
  return detail::make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
  });
}

// Elementwise product.
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  detail::require(a.shape() == b.shape(), "mul",
                  "shape mismatch " + detail::two_shapes(a.shape(), b.shape()));
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
  return detail::make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      auto& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * pa.value[i];
    }
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T c) {
  Tensor<T> out = a.value();
  for (auto& v : out.vec()) v *= c;
  return detail::make_result<T>(std::move(out), {a}, [c](Node<T>& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += c * self.grad[i];
  });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  double acc = 0.0;
  for (T v : a.value().data()) acc += static_cast<double>(v);
  return detail::make_result<T>(
      Tensor<T>::scalar(static_cast<T>(acc)), {a}, [](Node<T>& self) {
        auto& g = self.parents[0]->grad_buffer();
        const T s = self.grad[0];
        for (auto& v : g.vec()) v += s;
      });
}

// Softmax over the last axis.
template <typename T>
Var<T> softmax_rows(const Var<T>& a) {
  const auto& x = a.value();
  detail::require(x.rank() >= 1, "softmax_rows", "needs rank >= 1");
  const std::size_t rows = x.rows();
  const std::size_t n = x.cols();
  Tensor<T> out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = x.raw() + r * n;
    T* o = out.raw() + r * n;
    const T mx = *std::max_element(in, in + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(static_cast<double>(in[j] - mx));
    for (std::size_t j = 0; j < n; ++j) {
      o[j] = static_cast<T>(std::exp(static_cast<double>(in[j] - mx)) / z);
    }
  }
  return detail::make_result<T>(std::move(out), {a}, [rows, n](Node<T>& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const T* y = self.value.raw() + r * n;
      const T* dy = self.grad.raw() + r * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += static_cast<double>(dy[j]) * y[j];
      T* dx = g.raw() + r * n;
      for (std::size_t j = 0; j < n; ++j) {
        dx[j] += static_cast<T>(y[j] * (dy[j] - dot));
      }
    }
  });
}

// Row-wise layer normalization of x [rows, n] with affine gain/bias [n].
template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gain, const Var<T>& bias,
                  double eps = 1e-5) {
  const auto& xv = x.value();
  const std::size_t n = xv.cols();
  detail::require(xv.rank() == 2, "layer_norm", "input must be rank 2, got " +
                                                    shape_str(xv.shape()));
  detail::require(gain.shape() == Shape{n} && bias.shape() == Shape{n},
                  "layer_norm",
                  "affine shape mismatch " +
                      detail::two_shapes(xv.shape(), gain.shape()));
  const std::size_t rows = xv.rows();
  Tensor<T> out(xv.shape());
  auto xhat = std::make_shared<std::vector<T>>(xv.numel());
  auto rstd = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = xv.raw() + r * n;
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += in[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = in[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = rs;
    for (std::size_t j = 0; j < n; ++j) {
      const T h = static_cast<T>((in[j] - mean) * rs);
      (*xhat)[r * n + j] = h;
      out[r * n + j] = h * gain.value()[j] + bias.value()[j];
    }
  }
  return detail::make_result<T>(
      std::move(out), {x, gain, bias}, [rows, n, xhat, rstd](Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pg = *self.parents[1];
        auto& pb = *self.parents[2];
        const T* dy = self.grad.raw();
        if (pg.requires_grad || pb.requires_grad) {
          std::vector<double> dg(n, 0.0), db(n, 0.0);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < n; ++j) {
              dg[j] += static_cast<double>(dy[r * n + j]) * (*xhat)[r * n + j];
              db[j] += dy[r * n + j];
            }
          }
          if (pg.requires_grad) {
            auto& g = pg.grad_buffer();
            for (std::size_t j = 0; j < n; ++j) g[j] += static_cast<T>(dg[j]);
          }
          if (pb.requires_grad) {
            auto& g = pb.grad_buffer();
            for (std::size_t j = 0; j < n; ++j) g[j] += static_cast<T>(db[j]);
          }
        }
        if (px.requires_grad) {
          auto& gx = px.grad_buffer();
          const T* gain_v = pg.value.raw();
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_dh = 0.0, mean_dh_h = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              const double dh = static_cast<double>(dy[r * n + j]) * gain_v[j];
              mean_dh += dh;
              mean_dh_h += dh * (*xhat)[r * n + j];
            }
            mean_dh /= static_cast<double>(n);
            mean_dh_h /= static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
              const double dh = static_cast<double>(dy[r * n + j]) * gain_v[j];
              gx[r * n + j] += static_cast<T>(
                  (*rstd)[r] * (dh - mean_dh - (*xhat)[r * n + j] * mean_dh_h));
            }
          }
        }
      });
}

// GELU, tanh approximation. tanh values are kept for the backward pass.
template <typename T>
Var<T> gelu(const Var<T>& a) {
  using Arr = Eigen::Array<T, Eigen::Dynamic, 1>;
  using ArrMap = Eigen::Map<const Arr>;
  static constexpr T kC = static_cast<T>(0.7978845608028654);  // sqrt(2/pi)
  static constexpr T kA = static_cast<T>(0.044715);
  const auto n = static_cast<Eigen::Index>(a.value().numel());
  const ArrMap x(a.value().raw(), n);
  auto t = std::make_shared<Arr>((kC * (x + kA * x.cube())).tanh());
  Tensor<T> out(a.shape());
  Eigen::Map<Arr>(out.raw(), n) = T{0.5} * x * (T{1} + *t);
  return detail::make_result<T>(std::move(out), {a}, [t, n](Node<T>& self) {
    auto& p = *self.parents[0];
    const ArrMap xv(p.value.raw(), n);
    const ArrMap dy(self.grad.raw(), n);
    Eigen::Map<Arr> g(p.grad_buffer().raw(), n);
    g += dy * (T{0.5} * (T{1} + *t) +
               T{0.5} * xv * (T{1} - t->square()) * kC * (T{1} + T{3} * kA * xv.square()));
  });
}

// Gathers rows of table [V, d] -> [ids.size(), d].
template <typename T>
Var<T> embedding(const Var<T>& table, std::span<const int> ids) {
  const auto& tv = table.value();
  detail::require(tv.rank() == 2, "embedding",
                  "table must be rank 2, got " + shape_str(tv.shape()));
  const std::size_t vocab = tv.dim(0);
  const std::size_t d = tv.dim(1);
  detail::require(!ids.empty(), "embedding", "no ids");
  Tensor<T> out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw ShapeError("embedding: id " + std::to_string(id) +
                       " outside table of shape " + shape_str(tv.shape()));
    }
    std::copy_n(tv.raw() + static_cast<std::size_t>(id) * d, d, out.raw() + i * d);
  }
  std::vector<int> saved(ids.begin(), ids.end());
  return detail::make_result<T>(
      std::move(out), {table}, [saved = std::move(saved), d](Node<T>& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < saved.size(); ++i) {
          T* row = g.raw() + static_cast<std::size_t>(saved[i]) * d;
          const T* src = self.grad.raw() + i * d;
          for (std::size_t j = 0; j < d; ++j) row[j] += src[j];
        }
      });
}

// Multi-head causal self-attention core: softmax(QK^T / sqrt(dh) + mask) V.
// q, k, v are [batch*seq, d]; heads split d into equal column slices.
template <typename T>
Var<T> causal_attention(const Var<T>& q, const Var<T>& k, const Var<T>& v,
                        std::size_t batch, std::size_t seq, std::size_t heads) {
  const auto& qs = q.shape();
  detail::require(qs.size() == 2 && qs == k.shape() && qs == v.shape(),
                  "causal_attention",
                  "q/k/v shapes differ " + detail::two_shapes(qs, k.shape()) +
                      " / " + shape_str(v.shape()));
  detail::require(batch * seq == qs[0], "causal_attention",
                  "batch*seq != rows in " + shape_str(qs));
  const std::size_t d = qs[1];
  detail::require(heads > 0 && d % heads == 0, "causal_attention",
                  "width " + std::to_string(d) + " not divisible by " +
                      std::to_string(heads) + " heads");
  const std::size_t dh = d / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
  const auto T_ = static_cast<Eigen::Index>(seq);
  const auto DH = static_cast<Eigen::Index>(dh);
  const Eigen::OuterStride<> stride(static_cast<Eigen::Index>(d));

  Tensor<T> out(qs);
  auto probs = std::make_shared<std::vector<T>>(batch * heads * seq * seq, T{0});
  RowMat<T> scores(T_, T_);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = b * seq * d + h * dh;
      ConstStridedMap<T> Q(q.value().raw() + off, T_, DH, stride);
      ConstStridedMap<T> K(k.value().raw() + off, T_, DH, stride);
      ConstStridedMap<T> V(v.value().raw() + off, T_, DH, stride);
      scores.noalias() = Q.lazyProduct(K.transpose());
      MatMap<T> P(probs->data() + (b * heads + h) * seq * seq, T_, T_);
      for (Eigen::Index i = 0; i < T_; ++i) {
        T mx = scores(i, 0);
        for (Eigen::Index j = 1; j <= i; ++j) mx = std::max(mx, scores(i, j));
        double z = 0.0;
        for (Eigen::Index j = 0; j <= i; ++j) {
          const T e = std::exp((scores(i, j) - mx) * static_cast<T>(sc));
          P(i, j) = e;
          z += e;
        }
        const T inv = static_cast<T>(1.0 / z);
        for (Eigen::Index j = 0; j <= i; ++j) P(i, j) *= inv;
      }
      StridedMap<T>(out.raw() + off, T_, DH, stride).noalias() = P.lazyProduct(V);
    }
  }
  return detail::make_result<T>(
      std::move(out), {q, k, v},
      [probs, batch, seq, heads, d, dh, sc](Node<T>& self) {
        auto& pq = *self.parents[0];
        auto& pk = *self.parents[1];
        auto& pv = *self.parents[2];
        const auto T_ = static_cast<Eigen::Index>(seq);
        const auto DH = static_cast<Eigen::Index>(dh);
        const Eigen::OuterStride<> stride(static_cast<Eigen::Index>(d));
        T* gq = pq.requires_grad ? pq.grad_buffer().raw() : nullptr;
        T* gk = pk.requires_grad ? pk.grad_buffer().raw() : nullptr;
        T* gv = pv.requires_grad ? pv.grad_buffer().raw() : nullptr;
        RowMat<T> dP(T_, T_);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t off = b * seq * d + h * dh;
            ConstStridedMap<T> dO(self.grad.raw() + off, T_, DH, stride);
            ConstStridedMap<T> Q(pq.value.raw() + off, T_, DH, stride);
            ConstStridedMap<T> K(pk.value.raw() + off, T_, DH, stride);
            ConstStridedMap<T> V(pv.value.raw() + off, T_, DH, stride);
            ConstMatMap<T> P(probs->data() + (b * heads + h) * seq * seq, T_, T_);
            if (gv) {
              StridedMap<T>(gv + off, T_, DH, stride).noalias() += P.transpose() * dO;
            }
            if (!gq && !gk) continue;
            dP.noalias() = dO * V.transpose();
            for (Eigen::Index i = 0; i < T_; ++i) {
              double dot = 0.0;
              for (Eigen::Index j = 0; j <= i; ++j) {
                dot += static_cast<double>(dP(i, j)) * P(i, j);
              }
              for (Eigen::Index j = 0; j <= i; ++j) {
                dP(i, j) = static_cast<T>(P(i, j) * (dP(i, j) - dot) * sc);
              }
              for (Eigen::Index j = i + 1; j < T_; ++j) dP(i, j) = T{0};
            }
            if (gq) StridedMap<T>(gq + off, T_, DH, stride).noalias() += dP * K;
            if (gk) StridedMap<T>(gk + off, T_, DH, stride).noalias() += dP.transpose() * Q;
          }
        }
      });
}

// Mean negative log-likelihood of targets under row-wise softmax(logits).
// Positions whose target equals ignore_index are skipped.
template <typename T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const int> targets,
                     int ignore_index = -1) {
  const auto& lv = logits.value();
  detail::require(lv.rank() == 2 && lv.dim(0) == targets.size(), "cross_entropy",
                  "logits " + shape_str(lv.shape()) + " vs " +
                      std::to_string(targets.size()) + " targets");
  const std::size_t rows = lv.dim(0);
  const std::size_t vocab = lv.dim(1);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const int t = targets[r];
    if (t == ignore_index) continue;
    if (t < 0 || static_cast<std::size_t>(t) >= vocab) {
      throw ShapeError("cross_entropy: target " + std::to_string(t) +
                       " outside vocabulary of " + std::to_string(vocab));
    }
    const T* z = lv.raw() + r * vocab;
    const T mx = *std::max_element(z, z + vocab);
    double s = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) s += std::exp(static_cast<double>(z[j] - mx));
    total += std::log(s) + mx - z[t];
    ++count;
  }
  detail::require(count > 0, "cross_entropy", "no non-ignored targets");
  std::vector<int> saved(targets.begin(), targets.end());
  return detail::make_result<T>(
      Tensor<T>::scalar(static_cast<T>(total / static_cast<double>(count))),
      {logits},
      [saved = std::move(saved), rows, vocab, count, ignore_index](Node<T>& self) {
        auto& p = *self.parents[0];
        auto& g = p.grad_buffer();
        const double scale = static_cast<double>(self.grad[0]) / static_cast<double>(count);
        for (std::size_t r = 0; r < rows; ++r) {
          const int t = saved[r];
          if (t == ignore_index) continue;
          const T* z = p.value.raw() + r * vocab;
          const T mx = *std::max_element(z, z + vocab);
          double s = 0.0;
          for (std::size_t j = 0; j < vocab; ++j) s += std::exp(static_cast<double>(z[j] - mx));
          T* gr = g.raw() + r * vocab;
          for (std::size_t j = 0; j < vocab; ++j) {
            double pj = std::exp(static_cast<double>(z[j] - mx)) / s;
            if (static_cast<int>(j) == t) pj -= 1.0;
            gr[j] += static_cast<T>(pj * scale);
          }
        }
      });
}

// Populates grads of every node reachable from a scalar loss.
template <typename T>
void backward(const Var<T>& loss) {
  if (loss.value().numel() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     shape_str(loss.shape()));
  }
  Node<T>* root = loss.node();
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad_buffer()[0] += T{1};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

}  // namespace layeranat::ag
