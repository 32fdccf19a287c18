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

// Layer-anatomy diagnostics. Every diagnostic works on private clones of the
// model it is given, so the caller's model is never modified.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "layeranat/corpus.hpp"
#include "layeranat/error.hpp"
#include "layeranat/linalg.hpp"
#include "layeranat/model.hpp"
#include "layeranat/parallel.hpp"
#include "layeranat/rng.hpp"
#include "layeranat/training.hpp"

namespace layeranat {

// ---------------------------------------------------------------------------
// Importance map

enum class Category { redundant, minor, important, critical, anti };

inline std::string_view category_name(Category c) {
  switch (c) {
    case Category::redundant: return "redundant";
    case Category::minor: return "minor";
    case Category::important: return "important";
    case Category::critical: return "critical";
    case Category::anti: return "anti";
  }
  return "?";
}

inline Category parse_category(std::string_view s) {
  for (Category c : {Category::redundant, Category::minor, Category::important,
                     Category::critical, Category::anti}) {
    if (category_name(c) == s) return c;
  }
  throw ValidationError("unknown category: " + std::string(s));
}

// Thresholds on degradation D (%): <0 anti, [0,10) redundant, [10,30) minor,
// [30,100) important, >=100 critical.
inline Category classify(double degradation_pct) {
  if (std::isnan(degradation_pct)) throw ValidationError("classify: degradation is NaN");
  if (degradation_pct < 0.0) return Category::anti;
  if (degradation_pct < 10.0) return Category::redundant;
  if (degradation_pct < 30.0) return Category::minor;
  if (degradation_pct < 100.0) return Category::important;
  return Category::critical;
}

inline double degradation_pct(double ppl, double baseline) {
  return (ppl / baseline - 1.0) * 100.0;
}

struct ImportanceRecord {
  int layer = 0;
  double ppl_after = 0.0;
  double degradation_pct = 0.0;
  Category category = Category::redundant;
  std::string annotation;  // e.g. "boundary", "mlp-overlap-average"
};

struct ImportanceMap {
  double baseline_ppl = 0.0;
  std::vector<ImportanceRecord> records;
};

// Overwrites the overlapping leading block of `dst` with the mean of the
// given sources (a single source is a copy). Returns true when some source
// did not cover all of dst.
inline bool assign_overlap_mean(Tensor<float>& dst, const std::vector<const Tensor<float>*>& srcs) {
  std::size_t rows = dst.dim(0), cols = dst.dim(1);
  for (const auto* s : srcs) {
    rows = std::min(rows, s->dim(0));
    cols = std::min(cols, s->dim(1));
  }
  const double inv = 1.0 / static_cast<double>(srcs.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (const auto* s : srcs) acc += s->at(r, c);
      dst.at(r, c) = static_cast<float>(acc * inv);
    }
  }
  return rows != dst.dim(0) || cols != dst.dim(1);
}

// Replaces every component of layer l with the mean of its neighbors (the
// single existing neighbor at a boundary). Returns an annotation.
inline std::string apply_neighbor_average(Model& work, const Model& original, std::size_t l) {
  const std::size_t n = original.num_layers();
  std::vector<std::size_t> nbrs;
  if (l > 0) nbrs.push_back(l - 1);
  if (l + 1 < n) nbrs.push_back(l + 1);
  bool partial = false;
  for (Component c : kModelComponents) {
    const ComponentId id{static_cast<int>(l), c};
    std::vector<const Tensor<float>*> srcs;
    for (std::size_t nb : nbrs) {
      srcs.push_back(&original.tensors()[original.require_slot({static_cast<int>(nb), c})]);
    }
    partial = assign_overlap_mean(work.tensors()[work.require_slot(id)], srcs) || partial;
  }
  std::string note = nbrs.size() == 1 ? "boundary" : "";
  if (partial) note += std::string(note.empty() ? "" : ",") + "mlp-overlap-average";
  return note;
}

inline ImportanceMap ablation_map(const Model& model, const EvalSet& eval, int pad_id) {
  const std::size_t n = model.num_layers();
  if (n < 2) throw ValidationError("ablation_map: model needs at least 2 layers");
  ImportanceMap out;
  out.baseline_ppl = perplexity(model, eval, pad_id);
  out.records.resize(n);
  const std::size_t workers = worker_count(n);
  std::vector<Model> clones(workers, model);
  parallel_for(n, [&](std::size_t w, std::size_t l) {
    Model& work = clones[w];
    const auto snapshot = work.tensors();
    const std::string note = apply_neighbor_average(work, model, l);
    const double ppl = perplexity(work, eval, pad_id);
    work.tensors() = snapshot;
    const double d = degradation_pct(ppl, out.baseline_ppl);
    out.records[l] = {static_cast<int>(l), ppl, d, classify(d), note};
  });
  return out;
}

// ---------------------------------------------------------------------------
// Weight stacks: one component across layers, restricted to the common
// leading index range when widths differ.

struct WeightStack {
  std::vector<const Tensor<float>*> layers;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool restricted = false;

  std::size_t positions() const { return rows * cols; }
  float at(std::size_t layer, std::size_t pos) const {
    return layers[layer]->at(pos / cols, pos % cols);
  }
};

inline WeightStack make_stack(const std::vector<const Tensor<float>*>& layers) {
  if (layers.empty()) throw ValidationError("weight stack: no layers");
  WeightStack s;
  s.layers = layers;
  s.rows = layers[0]->dim(0);
  s.cols = layers[0]->dim(1);
  for (const auto* t : layers) {
    if (t->rank() != 2) throw ShapeError("weight stack: rank-2 matrices required");
    if (t->dim(0) != s.rows || t->dim(1) != s.cols) s.restricted = true;
    s.rows = std::min(s.rows, t->dim(0));
    s.cols = std::min(s.cols, t->dim(1));
  }
  return s;
}

inline WeightStack component_stack(const Model& m, Component c, std::size_t count) {
  std::vector<const Tensor<float>*> layers;
  for (std::size_t l = 0; l < count; ++l) {
    layers.push_back(&m.tensors()[m.require_slot({static_cast<int>(l), c})]);
  }
  return make_stack(layers);
}

// ---------------------------------------------------------------------------
// Ridge predictability

struct PredictabilityRecord {
  std::string component;
  int target_layer = 0;
  std::optional<double> r_squared;  // nullopt: actual weights are constant
  double cosine = 0.0;
  std::size_t sample_size = 0;
  double ridge_lambda = 1.0;
  std::uint64_t seed = 0;
  bool restricted_range = false;
};

inline MatrixXd layer_design(std::size_t t, std::size_t total_layers) {
  MatrixXd X(static_cast<Eigen::Index>(t), 5);
  for (std::size_t l = 0; l < t; ++l) {
    X.row(static_cast<Eigen::Index>(l)) =
        layer_features(static_cast<double>(l), static_cast<double>(total_layers));
  }
  return X;
}

// Fits layers 0..t-1 of `stack` (which must hold at least t+1 layers) and
// predicts layer t at k sampled positions.
inline PredictabilityRecord predictability(const WeightStack& stack, std::size_t t,
                                           std::size_t total_layers, std::size_t k,
                                           double lambda, std::uint64_t seed) {
  if (t < 2) throw ValidationError("predictability: target layer must be >= 2");
  if (t >= stack.layers.size()) throw ValidationError("predictability: target layer out of range");
  Rng rng(derive_seed(seed, "ridge-sample"));
  const auto pos = rng.sample_without_replacement(stack.positions(), k);
  const auto K = static_cast<Eigen::Index>(pos.size());
  MatrixXd Y(static_cast<Eigen::Index>(t), K);
  for (std::size_t l = 0; l < t; ++l) {
    for (Eigen::Index j = 0; j < K; ++j) {
      Y(static_cast<Eigen::Index>(l), j) = stack.at(l, pos[static_cast<std::size_t>(j)]);
    }
  }
  const MatrixXd B = ridge_fit(layer_design(t, total_layers), Y, lambda);
  const Eigen::RowVectorXd pred =
      layer_features(static_cast<double>(t), static_cast<double>(total_layers)) * B;
  std::vector<double> predicted(pred.data(), pred.data() + K);
  std::vector<double> actual(pos.size());
  for (std::size_t j = 0; j < pos.size(); ++j) actual[j] = stack.at(t, pos[j]);
  PredictabilityRecord rec;
  rec.target_layer = static_cast<int>(t);
  rec.r_squared = r_squared(predicted, actual);
  rec.cosine = cosine_similarity(predicted, actual);
  rec.sample_size = pos.size();
  rec.ridge_lambda = lambda;
  rec.seed = seed;
  rec.restricted_range = stack.restricted;
  return rec;
}

inline PredictabilityRecord predictability(const Model& m, Component c, std::size_t t,
                                           std::size_t k = 10000, double lambda = 1.0,
                                           std::uint64_t seed = 0) {
  if (t < 2 || t >= m.num_layers()) {
    throw ValidationError("predictability: target layer " + std::to_string(t) +
                          " outside [2, " + std::to_string(m.num_layers() - 1) + "]");
  }
  auto rec = predictability(component_stack(m, c, t + 1), t, m.num_layers(), k, lambda, seed);
  rec.component = std::string(component_name(c));
  return rec;
}

struct ReplaceResult {
  double ppl = 0.0;
  double baseline_ppl = 0.0;
  double degradation_pct = 0.0;
};

// Replaces every component of each target layer with its ridge prediction
// from the original layers below it, all targets together, then evaluates.
inline ReplaceResult predict_and_replace(const Model& model, const std::set<int>& layers,
                                         const EvalSet& eval, int pad_id, double lambda = 1.0) {
  ReplaceResult res;
  res.baseline_ppl = perplexity(model, eval, pad_id);
  if (layers.empty()) {
    res.ppl = res.baseline_ppl;
    return res;
  }
  Model work = model;
  const std::size_t n = model.num_layers();
  for (int t : layers) {
    if (t < 2 || static_cast<std::size_t>(t) >= n) {
      throw ValidationError("predict_and_replace: layer " + std::to_string(t) +
                            " outside [2, " + std::to_string(n - 1) + "]");
    }
    const auto tt = static_cast<std::size_t>(t);
    const Eigen::RowVectorXd h = ridge_prediction_weights(
        layer_design(tt, n), layer_features(static_cast<double>(t), static_cast<double>(n)),
        lambda);
    for (Component c : kModelComponents) {
      const WeightStack stack = component_stack(model, c, tt + 1);
      Tensor<float>& dst = work.tensors()[work.require_slot({t, c})];
      for (std::size_t p = 0; p < stack.positions(); ++p) {
        double v = 0.0;
        for (std::size_t l = 0; l < tt; ++l) v += h(static_cast<Eigen::Index>(l)) * stack.at(l, p);
        dst.at(p / stack.cols, p % stack.cols) = static_cast<float>(v);
      }
    }
  }
  res.ppl = perplexity(work, eval, pad_id);
  res.degradation_pct = degradation_pct(res.ppl, res.baseline_ppl);
  return res;
}

// ---------------------------------------------------------------------------
// Structure statistics

struct DeltaCorrelation {
  std::vector<std::optional<double>> per_gap;  // rho(delta_l, delta_{l+1})
  std::optional<double> mean;
  // Value expected when layers are i.i.d.: consecutive deltas share the
  // middle layer with opposite sign.
  static constexpr double kIidReference = -0.5;
};

inline DeltaCorrelation delta_correlation(const WeightStack& stack) {
  const std::size_t n = stack.layers.size();
  if (n < 3) throw ValidationError("delta_correlation: needs at least 3 layers");
  const std::size_t P = stack.positions();
  std::vector<std::vector<double>> deltas(n - 1, std::vector<double>(P));
  for (std::size_t l = 0; l + 1 < n; ++l) {
    for (std::size_t p = 0; p < P; ++p) {
      deltas[l][p] = static_cast<double>(stack.at(l + 1, p)) - stack.at(l, p);
    }
  }
  DeltaCorrelation out;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t l = 0; l + 2 < n; ++l) {
    auto rho = pearson(deltas[l], deltas[l + 1]);
    out.per_gap.push_back(rho);
    if (rho) {
      sum += *rho;
      ++count;
    }
  }
  if (count) out.mean = sum / static_cast<double>(count);
  return out;
}

inline DeltaCorrelation delta_correlation(const Model& m, Component c) {
  return delta_correlation(component_stack(m, c, m.num_layers()));
}

struct StructureSummary {
  std::vector<std::vector<double>> cosine;  // layer x layer
  std::vector<double> explained_variance;   // top-k ratios
  std::size_t sample_size = 0;
  std::string note;
};

inline StructureSummary structure_summary(const WeightStack& stack, std::size_t k,
                                          std::size_t samples, std::uint64_t seed) {
  const std::size_t n = stack.layers.size();
  if (n < 2) throw ValidationError("structure_summary: needs at least 2 layers");
  StructureSummary out;
  Rng rng(derive_seed(seed, "structure-sample"));
  const auto pos = rng.sample_without_replacement(stack.positions(), samples);
  out.sample_size = pos.size();
  MatrixXd M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pos.size()));
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t j = 0; j < pos.size(); ++j) {
      M(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) = stack.at(l, pos[j]);
    }
  }
  out.cosine.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const auto ra = M.row(static_cast<Eigen::Index>(a));
      const auto rb = M.row(static_cast<Eigen::Index>(b));
      const double den = ra.norm() * rb.norm();
      const double c = den > 0.0 ? ra.dot(rb) / den : 0.0;
      out.cosine[a][b] = out.cosine[b][a] = c;
    }
  }
  auto ratios = explained_variance_ratios(M);
  if (k > n) {
    out.note = "k=" + std::to_string(k) + " truncated to layer count " + std::to_string(n);
    k = n;
  }
  ratios.resize(std::min(k, ratios.size()));
  out.explained_variance = std::move(ratios);
  if (stack.restricted) {
    out.note += std::string(out.note.empty() ? "" : "; ") + "restricted to common index range";
  }
  return out;
}

inline StructureSummary structure_summary(const Model& m, Component c, std::size_t k,
                                          std::size_t samples = 10000, std::uint64_t seed = 0) {
  return structure_summary(component_stack(m, c, m.num_layers()), k, samples, seed);
}

// ---------------------------------------------------------------------------
// Manipulation strategies

enum class Strategy { zero, clone, blend, lowrank_blend, scale };

inline std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::zero: return "zero";
    case Strategy::clone: return "clone";
    case Strategy::blend: return "blend";
    case Strategy::lowrank_blend: return "lowrank-blend";
    case Strategy::scale: return "scale";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view s) {
  for (Strategy x : {Strategy::zero, Strategy::clone, Strategy::blend, Strategy::lowrank_blend,
                     Strategy::scale}) {
    if (strategy_name(x) == s) return x;
  }
  throw ValidationError("unknown strategy: " + std::string(s));
}

struct ManipulationSpec {
  Strategy strategy = Strategy::scale;
  std::set<int> targets;
  double alpha = 0.9;
  std::size_t neighbor_count = 4;
};

struct ManipulationResult {
  double ppl = 0.0;
  double baseline_ppl = 0.0;
  double degradation_pct = 0.0;
  std::vector<std::string> notes;
};

// Non-target layers ordered by distance to `layer`, ties toward lower index.
inline std::vector<int> nearest_non_targets(int layer, const std::set<int>& targets,
                                            std::size_t num_layers) {
  std::vector<int> out;
  for (int l = 0; l < static_cast<int>(num_layers); ++l) {
    if (!targets.count(l)) out.push_back(l);
  }
  std::stable_sort(out.begin(), out.end(), [layer](int a, int b) {
    return std::abs(a - layer) < std::abs(b - layer);
  });
  return out;
}

// Weights proportional to 1/distance, normalized to sum to 1.
inline std::vector<double> inverse_distance_weights(const std::vector<int>& distances) {
  std::vector<double> w;
  double total = 0.0;
  for (int d : distances) {
    w.push_back(1.0 / static_cast<double>(d));
    total += w.back();
  }
  for (auto& x : w) x /= total;
  return w;
}

inline std::vector<std::string> apply_manipulation(Model& work, const Model& original,
                                                   const ManipulationSpec& spec) {
  const std::size_t n = original.num_layers();
  std::vector<std::string> notes;
  if (spec.targets.empty()) throw ValidationError("manipulate: no target layers");
  for (int t : spec.targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= n) {
      throw ValidationError("manipulate: target layer " + std::to_string(t) + " out of range");
    }
  }
  if (spec.strategy == Strategy::scale && (spec.alpha < 0.0 || spec.alpha > 1.0)) {
    throw ValidationError("manipulate: scale alpha must lie in [0, 1]");
  }
  const bool needs_neighbors = spec.strategy == Strategy::clone ||
                               spec.strategy == Strategy::blend ||
                               spec.strategy == Strategy::lowrank_blend;
  if (needs_neighbors && spec.targets.size() >= n) {
    throw ValidationError("manipulate: " + std::string(strategy_name(spec.strategy)) +
                          " needs at least one non-target layer");
  }
  auto weight = [&](const Model& m, int l, Component c) -> const Tensor<float>& {
    return m.tensors()[m.require_slot({l, c})];
  };
  for (int t : spec.targets) {
    const auto order = nearest_non_targets(t, spec.targets, n);
    std::vector<int> nbrs;
    if (needs_neighbors) {
      const std::size_t want = spec.strategy == Strategy::blend ? spec.neighbor_count : 1;
      nbrs.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(want, order.size())));
      if (spec.strategy == Strategy::blend && nbrs.size() < want) {
        notes.push_back("layer " + std::to_string(t) + ": blend used " +
                        std::to_string(nbrs.size()) + " of " + std::to_string(want) +
                        " neighbors");
      }
    }
    for (Component c : kModelComponents) {
      Tensor<float>& dst = work.tensors()[work.require_slot({t, c})];
      const Tensor<float>& orig = weight(original, t, c);
      switch (spec.strategy) {
        case Strategy::zero:
          dst.fill(0.0f);
          break;
        case Strategy::scale:
          for (std::size_t i = 0; i < dst.numel(); ++i) {
            dst[i] = static_cast<float>(spec.alpha * orig[i]);
          }
          break;
        case Strategy::clone: {
          const auto& src = weight(original, nbrs[0], c);
          if (src.shape() != dst.shape()) {
            notes.push_back("layer " + std::to_string(t) + " " +
                            std::string(component_name(c)) + ": cloned from layer " +
                            std::to_string(nbrs[0]) + " with truncate/zero-pad " +
                            shape_str(src.shape()) + " -> " + shape_str(dst.shape()));
          }
          dst = resize_leading(src, dst.shape());
          break;
        }
        case Strategy::blend: {
          std::vector<int> dist;
          for (int nb : nbrs) dist.push_back(std::abs(nb - t));
          const auto w = inverse_distance_weights(dist);
          std::vector<double> acc(dst.numel(), 0.0);
          for (std::size_t i = 0; i < nbrs.size(); ++i) {
            const auto src = resize_leading(weight(original, nbrs[i], c), dst.shape());
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w[i] * src[j];
          }
          for (std::size_t j = 0; j < acc.size(); ++j) dst[j] = static_cast<float>(acc[j]);
          break;
        }
        case Strategy::lowrank_blend:
          dst = lowrank_blend(resize_leading(weight(original, nbrs[0], c), dst.shape()), orig);
          break;
      }
    }
  }
  return notes;
}

inline ManipulationResult manipulate(const Model& model, const ManipulationSpec& spec,
                                     const EvalSet& eval, int pad_id) {
  ManipulationResult res;
  Model work = model;
  res.notes = apply_manipulation(work, model, spec);
  res.baseline_ppl = perplexity(model, eval, pad_id);
  res.ppl = perplexity(work, eval, pad_id);
  res.degradation_pct = degradation_pct(res.ppl, res.baseline_ppl);
  return res;
}

// ---------------------------------------------------------------------------
// Recovery-speed probe

struct RecoveryConfig {
  double noise_scale = 0.5;
  std::size_t max_steps = 200;
  std::size_t eval_every = 10;
  double lr = 1e-4;
  double clip = 1.0;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
};

inline constexpr std::array<double, 3> kRecoveryThresholds = {2.0, 1.5, 1.1};

struct RecoveryCurve {
  int layer = 0;
  double baseline_ppl = 0.0;
  double ppl_after_noise = 0.0;
  std::vector<std::pair<std::size_t, double>> samples;  // (step, ppl)
  std::array<std::optional<std::size_t>, 3> steps_to{};  // <2x, <1.5x, <1.1x baseline
  double final_ppl = 0.0;
  bool improved_below_baseline = false;
  bool diverged = false;
  std::map<std::string, double> noise_sigma;  // per component
  std::map<std::string, Tensor<float>> recovered;  // fine-tuned layer weights
};

// Adds N(0, sigma^2) with sigma = scale * std(entries) to every component of
// layer l. Returns the sigma used per component.
inline std::map<std::string, double> inject_noise(Model& m, std::size_t l, double scale,
                                                  std::uint64_t seed) {
  Rng rng(derive_seed(seed, "recovery-noise", l));
  std::map<std::string, double> sigmas;
  for (Component c : kModelComponents) {
    auto& w = m.tensors()[m.require_slot({static_cast<int>(l), c})];
    const double sigma = scale * mean_std<float>(w.data()).second;
    sigmas[std::string(component_name(c))] = sigma;
    if (sigma == 0.0) continue;
    for (auto& v : w.vec()) v = static_cast<float>(v + rng.normal(0.0, sigma));
  }
  return sigmas;
}

// Perturbs layer l, then fine-tunes only that layer's weight matrices and
// records perplexity against the pre-noise baseline. The fine-tuned copy is
// moved into `tuned` when given.
inline RecoveryCurve recovery_probe(const Model& model, std::size_t layer, const Dataset& data,
                                    const EvalSet& eval, const RecoveryConfig& cfg,
                                    Model* tuned = nullptr) {
  if (layer >= model.num_layers()) {
    throw ValidationError("recovery_probe: layer " + std::to_string(layer) + " out of range");
  }
  if (cfg.eval_every == 0) throw ValidationError("recovery_probe: eval-every must be positive");
  const int pad = data.vocab.pad();
  RecoveryCurve curve;
  curve.layer = static_cast<int>(layer);
  curve.baseline_ppl = perplexity(model, eval, pad);

  Model work = model;
  curve.noise_sigma = inject_noise(work, layer, cfg.noise_scale, cfg.seed);
  curve.ppl_after_noise = perplexity(work, eval, pad);
  curve.samples.push_back({0, curve.ppl_after_noise});

  std::vector<bool> mask = mask_none(work);
  mask_add_layer_components(work, layer, mask);
  Trainer trainer(work, AdamWConfig{.lr = cfg.lr}, cfg.clip);
  auto stream = data.train_stream(cfg.batch_size, derive_seed(cfg.seed, "recovery-batches", layer));
  for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
    try {
      trainer.step(stream.next(), mask);
    } catch (const DivergenceError&) {
      curve.diverged = true;
      break;
    }
    if (step % cfg.eval_every == 0 || step == cfg.max_steps) {
      const double ppl = perplexity(work, eval, pad);
      if (!std::isfinite(ppl)) {
        curve.diverged = true;
        break;
      }
      curve.samples.push_back({step, ppl});
    }
  }
  for (std::size_t k = 0; k < kRecoveryThresholds.size(); ++k) {
    const double limit = kRecoveryThresholds[k] * curve.baseline_ppl;
    for (const auto& [step, ppl] : curve.samples) {
      if (ppl < limit) {
        curve.steps_to[k] = step;
        break;
      }
    }
  }
  curve.final_ppl = curve.samples.back().second;
  curve.improved_below_baseline = curve.final_ppl < curve.baseline_ppl;
  for (Component c : kModelComponents) {
    const ComponentId id{static_cast<int>(layer), c};
    curve.recovered[id.name()] = get_weights(work, id);
  }
  if (tuned) *tuned = std::move(work);
  return curve;
}

}  // namespace layeranat
