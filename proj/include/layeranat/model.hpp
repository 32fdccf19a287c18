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

// Decoder-only transformer with per-layer FFN width.
//
// Layer l: x += o_proj(attn(ln1(x))); x += down_proj(gelu(up_proj(ln2(x)))).
// Weights are stored [in, out] so a projection is x * W. Every decoder
// weight matrix is addressable by a ComponentId; embeddings, norms and the
// output head are not.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layeranat/autograd.hpp"
#include "layeranat/corpus.hpp"
#include "layeranat/error.hpp"
#include "layeranat/rng.hpp"
#include "layeranat/tensor.hpp"

namespace layeranat {

enum class LayerRole { critical, minor, redundant, anti };

inline std::string_view role_name(LayerRole r) {
  switch (r) {
    case LayerRole::critical: return "critical";
    case LayerRole::minor: return "minor";
    case LayerRole::redundant: return "redundant";
    case LayerRole::anti: return "anti";
  }
  return "?";
}

inline LayerRole parse_role(std::string_view s) {
  if (s == "critical") return LayerRole::critical;
  if (s == "minor") return LayerRole::minor;
  if (s == "redundant") return LayerRole::redundant;
  if (s == "anti") return LayerRole::anti;
  throw ValidationError("unknown layer role: " + std::string(s));
}

struct LayerSpec {
  int index = 0;
  LayerRole role = LayerRole::redundant;
  int ffn_mult = 1;
};

struct ModelSpec {
  std::vector<LayerSpec> layers;
  std::size_t dim = 192;
  std::size_t heads = 4;
  std::size_t vocab = 0;
  std::size_t block = 64;

  std::size_t num_layers() const { return layers.size(); }
  std::size_t ffn_width(std::size_t l) const {
    return static_cast<std::size_t>(layers.at(l).ffn_mult) * dim;
  }
  friend bool operator==(const ModelSpec& a, const ModelSpec& b) {
    if (a.dim != b.dim || a.heads != b.heads || a.vocab != b.vocab ||
        a.block != b.block || a.layers.size() != b.layers.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
      const auto& x = a.layers[i];
      const auto& y = b.layers[i];
      if (x.index != y.index || x.role != y.role || x.ffn_mult != y.ffn_mult) return false;
    }
    return true;
  }
};

// The 12-layer heterogeneous growth architecture: critical x4, minor x2,
// redundant x1.
inline std::vector<LayerSpec> growth_layers() {
  using R = LayerRole;
  const std::array<R, 12> roles = {R::redundant, R::critical, R::critical, R::redundant,
                                   R::critical,  R::critical, R::redundant, R::minor,
                                   R::critical,  R::critical, R::minor,    R::redundant};
  std::vector<LayerSpec> out;
  for (int i = 0; i < 12; ++i) {
    const R r = roles[static_cast<std::size_t>(i)];
    out.push_back({i, r, r == R::critical ? 4 : r == R::minor ? 2 : 1});
  }
  return out;
}

inline ModelSpec growth_spec(std::size_t vocab, std::size_t dim = 192,
                             std::size_t heads = 4, std::size_t block = 64) {
  return ModelSpec{growth_layers(), dim, heads, vocab, block};
}

// Growth and uniform runs share one architecture; "uniform" names the
// training protocol, so the twin is the same spec.
inline ModelSpec uniform_twin(const ModelSpec& growth) { return growth; }

inline void validate_spec(const ModelSpec& spec) {
  if (spec.layers.empty()) throw ValidationError("model spec: no layers");
  if (spec.dim == 0 || spec.heads == 0 || spec.vocab == 0 || spec.block == 0) {
    throw ValidationError("model spec: dim, heads, vocab and block must be positive");
  }
  if (spec.dim % spec.heads != 0) {
    throw ValidationError("model spec: dim " + std::to_string(spec.dim) +
                          " not divisible by " + std::to_string(spec.heads) + " heads");
  }
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    if (l.index != static_cast<int>(i)) {
      throw ValidationError("model spec: layer " + std::to_string(i) +
                            " carries index " + std::to_string(l.index));
    }
    if (l.role == LayerRole::anti) {
      throw ValidationError("model spec: layer " + std::to_string(i) +
                            " has role anti; anti layers are excluded from growth models");
    }
    if (l.ffn_mult != 1 && l.ffn_mult != 2 && l.ffn_mult != 4) {
      throw ValidationError("model spec: layer " + std::to_string(i) +
                            " ffn multiplier must be 1, 2 or 4, got " +
                            std::to_string(l.ffn_mult));
    }
  }
}

enum class Component { q_proj, k_proj, v_proj, o_proj, gate_proj, up_proj, down_proj };

inline constexpr std::array<Component, 7> kAllComponents = {
    Component::q_proj,    Component::k_proj,  Component::v_proj,   Component::o_proj,
    Component::gate_proj, Component::up_proj, Component::down_proj};

// gate_proj is reserved in the id space; this MLP is the non-gated two-matrix form.
inline constexpr std::array<Component, 6> kModelComponents = {
    Component::q_proj, Component::k_proj,  Component::v_proj,
    Component::o_proj, Component::up_proj, Component::down_proj};

inline bool is_mlp(Component c) {
  return c == Component::gate_proj || c == Component::up_proj || c == Component::down_proj;
}

inline std::string_view component_name(Component c) {
  switch (c) {
    case Component::q_proj: return "q_proj";
    case Component::k_proj: return "k_proj";
    case Component::v_proj: return "v_proj";
    case Component::o_proj: return "o_proj";
    case Component::gate_proj: return "gate_proj";
    case Component::up_proj: return "up_proj";
    case Component::down_proj: return "down_proj";
  }
  return "?";
}

inline Component parse_component(std::string_view s) {
  for (Component c : kAllComponents) {
    if (component_name(c) == s) return c;
  }
  throw ValidationError("unknown component: " + std::string(s));
}

struct ComponentId {
  int layer = 0;
  Component component = Component::q_proj;
  std::string name() const {
    return "layers." + std::to_string(layer) + "." + std::string(component_name(component));
  }
};

struct ParamInfo {
  std::string name;
  int layer = -1;  // -1 for embeddings, final norm, head
  std::optional<Component> component;
};

struct LayerSlots {
  std::size_t ln1_gain = 0, ln1_bias = 0, ln2_gain = 0, ln2_bias = 0;
  std::array<std::optional<std::size_t>, 7> components{};
};

class Model {
 public:
  Model() = default;

  static Model build(const ModelSpec& spec, std::uint64_t seed) {
    validate_spec(spec);
    Model m;
    m.spec_ = spec;
    m.seed_ = seed;
    const std::size_t d = spec.dim;
    const std::size_t nl = spec.num_layers();
    Rng rng(derive_seed(seed, "init"));
    const double std_in = 0.02;
    const double std_out = 0.02 / std::sqrt(2.0 * static_cast<double>(nl));
    auto normal = [&](Shape s, double sd) {
      Tensor<float> t(std::move(s));
      for (auto& v : t.vec()) v = static_cast<float>(rng.normal(0.0, sd));
      return t;
    };
    m.tok_emb_ = m.add("tok_emb", -1, {}, normal({spec.vocab, d}, std_in));
    m.pos_emb_ = m.add("pos_emb", -1, {}, normal({spec.block, d}, std_in));
    for (std::size_t l = 0; l < nl; ++l) {
      const int li = static_cast<int>(l);
      const std::string p = "layers." + std::to_string(l) + ".";
      const std::size_t f = spec.ffn_width(l);
      LayerSlots s;
      s.ln1_gain = m.add(p + "ln1.gain", li, {}, Tensor<float>({d}, 1.0f));
      s.ln1_bias = m.add(p + "ln1.bias", li, {}, Tensor<float>({d}, 0.0f));
      for (Component c : {Component::q_proj, Component::k_proj, Component::v_proj}) {
        s.components[static_cast<std::size_t>(c)] =
            m.add(p + std::string(component_name(c)), li, c, normal({d, d}, std_in));
      }
      s.components[static_cast<std::size_t>(Component::o_proj)] =
          m.add(p + "o_proj", li, Component::o_proj, normal({d, d}, std_out));
      s.ln2_gain = m.add(p + "ln2.gain", li, {}, Tensor<float>({d}, 1.0f));
      s.ln2_bias = m.add(p + "ln2.bias", li, {}, Tensor<float>({d}, 0.0f));
      s.components[static_cast<std::size_t>(Component::up_proj)] =
          m.add(p + "up_proj", li, Component::up_proj, normal({d, f}, std_in));
      s.components[static_cast<std::size_t>(Component::down_proj)] =
          m.add(p + "down_proj", li, Component::down_proj, normal({f, d}, std_out));
      m.layers_.push_back(s);
    }
    m.lnf_gain_ = m.add("lnf.gain", -1, {}, Tensor<float>({d}, 1.0f));
    m.lnf_bias_ = m.add("lnf.bias", -1, {}, Tensor<float>({d}, 0.0f));
    m.head_ = m.add("head", -1, {}, normal({d, spec.vocab}, std_in));
    return m;
  }

  // Rebuilds the slot layout for `spec` and adopts the given tensors, which
  // must be in build() order with matching shapes.
  static Model from_tensors(const ModelSpec& spec, std::uint64_t seed,
                            std::vector<Tensor<float>> tensors) {
    Model m = build(spec, seed);
    if (tensors.size() != m.tensors_.size()) {
      throw FormatError("model: expected " + std::to_string(m.tensors_.size()) +
                        " tensors, got " + std::to_string(tensors.size()));
    }
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (tensors[i].shape() != m.tensors_[i].shape()) {
        throw FormatError("model: tensor " + m.info_[i].name + " has shape " +
                          shape_str(tensors[i].shape()) + ", expected " +
                          shape_str(m.tensors_[i].shape()));
      }
    }
    m.tensors_ = std::move(tensors);
    return m;
  }

  const ModelSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_layers() const { return layers_.size(); }

  std::vector<Tensor<float>>& tensors() { return tensors_; }
  const std::vector<Tensor<float>>& tensors() const { return tensors_; }
  const std::vector<ParamInfo>& params() const { return info_; }
  const LayerSlots& layer(std::size_t l) const { return layers_.at(l); }

  std::size_t tok_emb() const { return tok_emb_; }
  std::size_t pos_emb() const { return pos_emb_; }
  std::size_t lnf_gain() const { return lnf_gain_; }
  std::size_t lnf_bias() const { return lnf_bias_; }
  std::size_t head() const { return head_; }

  std::optional<std::size_t> slot(ComponentId id) const {
    if (id.layer < 0 || static_cast<std::size_t>(id.layer) >= layers_.size()) {
      return std::nullopt;
    }
    return layers_[static_cast<std::size_t>(id.layer)]
        .components[static_cast<std::size_t>(id.component)];
  }

  std::size_t require_slot(ComponentId id) const {
    auto s = slot(id);
    if (!s) throw ValidationError("no such component: " + id.name());
    return *s;
  }

  // Every tensor index that belongs to layer l (components and norms).
  std::vector<std::size_t> layer_tensor_indices(std::size_t l) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < info_.size(); ++i) {
      if (info_[i].layer == static_cast<int>(l)) out.push_back(i);
    }
    return out;
  }

  std::vector<ComponentId> component_ids() const {
    std::vector<ComponentId> out;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      for (Component c : kAllComponents) {
        if (layers_[l].components[static_cast<std::size_t>(c)]) {
          out.push_back({static_cast<int>(l), c});
        }
      }
    }
    return out;
  }

 private:
  std::size_t add(std::string name, int layer, std::optional<Component> c, Tensor<float> t) {
    info_.push_back({std::move(name), layer, c});
    tensors_.push_back(std::move(t));
    return tensors_.size() - 1;
  }

  ModelSpec spec_;
  std::uint64_t seed_ = 0;
  std::vector<Tensor<float>> tensors_;
  std::vector<ParamInfo> info_;
  std::vector<LayerSlots> layers_;
  std::size_t tok_emb_ = 0, pos_emb_ = 0, lnf_gain_ = 0, lnf_bias_ = 0, head_ = 0;
};

inline Model build_model(const ModelSpec& spec, std::uint64_t seed) {
  return Model::build(spec, seed);
}

inline Tensor<float> get_weights(const Model& m, ComponentId id) {
  return m.tensors()[m.require_slot(id)];
}

inline void set_weights(Model& m, ComponentId id, Tensor<float> w) {
  auto& dst = m.tensors()[m.require_slot(id)];
  if (w.shape() != dst.shape()) {
    throw ShapeError("set_weights: " + id.name() + " has shape " +
                     shape_str(dst.shape()) + ", got " + shape_str(w.shape()));
  }
  dst = std::move(w);
}

// Closed-form count: embeddings (tokens + positions), per layer 4d^2
// attention + 2*d*(mult*d) MLP + two norms, final norm, output head.
inline std::size_t param_count(const ModelSpec& spec) {
  const std::size_t d = spec.dim;
  std::size_t n = spec.vocab * d + spec.block * d;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    n += 4 * d * d + 2 * d * spec.ffn_width(l) + 4 * d;
  }
  return n + 2 * d + d * spec.vocab;
}

inline std::size_t param_count(const Model& m) {
  std::size_t n = 0;
  for (const auto& t : m.tensors()) n += t.numel();
  return n;
}

inline std::uint64_t tensor_hash(const Tensor<float>& t, std::uint64_t h = kFnvOffset) {
  h = fnv1a64_values(std::span<const std::size_t>(t.shape()), h);
  return fnv1a64_values(t.data(), h);
}

inline std::uint64_t model_hash(const Model& m) {
  std::uint64_t h = kFnvOffset;
  for (const auto& t : m.tensors()) h = tensor_hash(t, h);
  return h;
}

inline std::uint64_t layer_hash(const Model& m, std::size_t l) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i : m.layer_tensor_indices(l)) h = tensor_hash(m.tensors()[i], h);
  return h;
}

using Var = ag::Var<float>;

// One autograd leaf per model tensor; only tensors flagged in `trainable`
// record gradients. An empty mask means nothing is trainable.
inline std::vector<Var> make_leaves(const Model& m, const std::vector<bool>& trainable = {}) {
  std::vector<Var> leaves;
  leaves.reserve(m.tensors().size());
  for (std::size_t i = 0; i < m.tensors().size(); ++i) {
    const bool rg = i < trainable.size() && trainable[i];
    leaves.push_back(ag::leaf(m.tensors()[i], rg));
  }
  return leaves;
}

// Logits [batch*seq, vocab] for token ids laid out [batch, seq].
inline Var forward_logits(const Model& m, const std::vector<Var>& w,
                          std::span<const int> ids, std::size_t batch, std::size_t seq) {
  const auto& spec = m.spec();
  if (seq == 0 || seq > spec.block) {
    throw ShapeError("forward: sequence length " + std::to_string(seq) +
                     " outside [1, " + std::to_string(spec.block) + "]");
  }
  if (ids.size() != batch * seq) {
    throw ShapeError("forward: " + std::to_string(ids.size()) + " ids for batch " +
                     std::to_string(batch) + " x seq " + std::to_string(seq));
  }
  std::vector<int> pos(batch * seq);
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<int>(i % seq);
  Var x = ag::add(ag::embedding(w[m.tok_emb()], ids),
                  ag::embedding(w[m.pos_emb()], std::span<const int>(pos)));
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const auto& s = m.layer(l);
    auto comp = [&](Component c) -> const Var& {
      return w[*s.components[static_cast<std::size_t>(c)]];
    };
    Var h = ag::layer_norm(x, w[s.ln1_gain], w[s.ln1_bias]);
    Var a = ag::causal_attention(ag::matmul(h, comp(Component::q_proj)),
                                 ag::matmul(h, comp(Component::k_proj)),
                                 ag::matmul(h, comp(Component::v_proj)), batch, seq,
                                 spec.heads);
    x = ag::add(x, ag::matmul(a, comp(Component::o_proj)));
    Var h2 = ag::layer_norm(x, w[s.ln2_gain], w[s.ln2_bias]);
    Var u = ag::gelu(ag::matmul(h2, comp(Component::up_proj)));
    x = ag::add(x, ag::matmul(u, comp(Component::down_proj)));
  }
  x = ag::layer_norm(x, w[m.lnf_gain()], w[m.lnf_bias()]);
  return ag::matmul(x, w[m.head()]);
}

// Sum of next-token NLL over non-ignored targets, in double.
inline std::pair<double, std::size_t> nll_sum(const Tensor<float>& logits,
                                              std::span<const int> targets,
                                              int ignore_index = -1) {
  const std::size_t vocab = logits.cols();
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < targets.size(); ++r) {
    const int t = targets[r];
    if (t == ignore_index) continue;
    const float* z = logits.raw() + r * vocab;
    double mx = z[0];
    for (std::size_t j = 1; j < vocab; ++j) mx = std::max(mx, static_cast<double>(z[j]));
    double s = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) s += std::exp(static_cast<double>(z[j]) - mx);
    total += std::log(s) + mx - static_cast<double>(z[static_cast<std::size_t>(t)]);
    ++count;
  }
  return {total, count};
}

// Per-sentence next-token NLL sums and counts. Each sentence is its own
// padded row, so causal masking keeps sentences independent.
inline std::vector<std::pair<double, std::size_t>> sentence_nll(
    const Model& m, const std::vector<std::vector<int>>& sentences, int pad_id) {
  ag::NoGradGuard guard;
  const std::size_t max_len = m.spec().block + 1;
  std::size_t seq = 1;
  for (const auto& s : sentences) {
    if (s.size() < 2) throw ValidationError("eval sentence shorter than 2 tokens");
    seq = std::max(seq, std::min(s.size(), max_len) - 1);
  }
  const std::size_t batch = sentences.size();
  std::vector<int> in(batch * seq, pad_id), tgt(batch * seq, -1);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto& s = sentences[b];
    const std::size_t n = std::min(s.size(), max_len) - 1;
    for (std::size_t j = 0; j < n; ++j) {
      in[b * seq + j] = s[j];
      tgt[b * seq + j] = s[j + 1];
    }
  }
  const auto leaves = make_leaves(m);
  const Var logits = forward_logits(m, leaves, in, batch, seq);
  std::vector<std::pair<double, std::size_t>> out;
  for (std::size_t b = 0; b < batch; ++b) {
    Tensor<float> rows({seq, logits.value().cols()});
    std::copy_n(logits.value().raw() + b * seq * rows.cols(), rows.numel(), rows.raw());
    out.push_back(nll_sum(rows, std::span<const int>(tgt).subspan(b * seq, seq)));
  }
  return out;
}

// exp(mean next-token cross-entropy over all eval sentences).
inline double perplexity(const Model& m, const EvalSet& eval, int pad_id) {
  if (eval.tokens.empty()) throw ValidationError("perplexity: empty eval set");
  if (pad_id < 0 || static_cast<std::size_t>(pad_id) >= m.spec().vocab) {
    throw ValidationError("perplexity: pad id outside model vocabulary");
  }
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& [nll, n] : sentence_nll(m, eval.tokens, pad_id)) {
    total += nll;
    count += n;
  }
  return std::exp(total / static_cast<double>(count));
}

// Mean next-token cross-entropy over the given blocks of a token stream.
inline double blocks_loss(const Model& m, const std::vector<int>& tokens,
                          const std::vector<std::size_t>& blocks, std::size_t block_size,
                          std::size_t chunk = 32) {
  if (blocks.empty()) throw ValidationError("blocks_loss: no blocks");
  ag::NoGradGuard guard;
  const auto leaves = make_leaves(m);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start < blocks.size(); start += chunk) {
    const std::size_t nb = std::min(chunk, blocks.size() - start);
    std::vector<int> in(nb * block_size), tgt(nb * block_size);
    for (std::size_t i = 0; i < nb; ++i) {
      fill_block(tokens, blocks[start + i], block_size, in.data() + i * block_size,
                 tgt.data() + i * block_size);
    }
    const Var logits = forward_logits(m, leaves, in, nb, block_size);
    auto [s, n] = nll_sum(logits.value(), tgt);
    total += s;
    count += n;
  }
  return total / static_cast<double>(count);
}

// Greedy continuation until <eos> or max_new tokens.
inline std::vector<int> greedy_decode(const Model& m, std::vector<int> prompt, int eos_id,
                                      std::size_t max_new) {
  ag::NoGradGuard guard;
  const auto leaves = make_leaves(m);
  std::vector<int> out;
  for (std::size_t step = 0; step < max_new; ++step) {
    std::vector<int> ctx = prompt;
    if (ctx.size() > m.spec().block) {
      ctx.erase(ctx.begin(), ctx.end() - static_cast<std::ptrdiff_t>(m.spec().block));
    }
    const Var logits = forward_logits(m, leaves, ctx, 1, ctx.size());
    const std::size_t vocab = logits.value().cols();
    const float* last = logits.value().raw() + (ctx.size() - 1) * vocab;
    const int next = static_cast<int>(std::max_element(last, last + vocab) - last);
    if (next == eos_id) break;
    out.push_back(next);
    prompt.push_back(next);
  }
  return out;
}

}  // namespace layeranat
