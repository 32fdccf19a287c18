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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "layeranat/corpus.hpp"
#include "layeranat/diagnostics.hpp"
#include "layeranat/error.hpp"
#include "layeranat/model.hpp"
#include "layeranat/rng.hpp"
#include "layeranat/training.hpp"

namespace layeranat {

struct CloneDirective {
  int src = 0;
  int dst = 0;
};

struct Phase {
  std::string name;
  std::set<int> trainable;
  std::vector<CloneDirective> clones;
  int epochs = 0;
  double ffn_scale_on_clone = 1.0;

  bool clone_only() const { return trainable.empty() && !clones.empty(); }
};

struct PhasePlan {
  std::vector<Phase> phases;
  bool globals_always_trainable = true;  // embeddings, head, final norm
  std::size_t num_layers = 0;
  std::vector<std::string> notes;
};

inline void validate_plan(const PhasePlan& plan) {
  if (plan.phases.empty()) throw ValidationError("phase plan: no phases");
  const int n = static_cast<int>(plan.num_layers);
  auto check_index = [n](int l, const std::string& where) {
    if (l < 0 || l >= n) {
      throw ValidationError("phase plan: " + where + " layer " + std::to_string(l) +
                            " outside [0, " + std::to_string(n - 1) + "]");
    }
  };
  std::set<int> trained, introduced;
  for (const auto& p : plan.phases) {
    if (p.epochs < 0) throw ValidationError("phase " + p.name + ": negative epochs");
    if (p.epochs == 0 && !p.clone_only()) {
      throw ValidationError("phase " + p.name + ": zero epochs on a training phase");
    }
    for (const auto& c : p.clones) {
      check_index(c.src, "clone source");
      check_index(c.dst, "clone destination");
      if (c.src == c.dst) throw ValidationError("phase " + p.name + ": clone onto itself");
      if (!trained.count(c.src)) {
        throw ValidationError("phase " + p.name + ": clone source L" + std::to_string(c.src) +
                              " has not been trained");
      }
      if (trained.count(c.dst)) {
        throw ValidationError("phase " + p.name + ": clone destination L" +
                              std::to_string(c.dst) + " was trainable before it was introduced");
      }
      introduced.insert(c.dst);
    }
    for (int l : p.trainable) check_index(l, "trainable");
    if (p.epochs > 0) trained.insert(p.trainable.begin(), p.trainable.end());
  }
  for (int l = 0; l < n; ++l) {
    if (!trained.count(l) && !introduced.count(l)) {
      throw ValidationError("phase plan: layer " + std::to_string(l) + " is never trained");
    }
  }
}

// Nearest layer in `pool` by index distance, ties toward the lower index.
inline int nearest_in(int layer, const std::set<int>& pool) {
  int best = -1;
  for (int c : pool) {
    if (best < 0 || std::abs(c - layer) < std::abs(best - layer)) best = c;
  }
  return best;
}

// Six developmental phases for the 12-layer growth architecture. The core
// (L4, L5) keeps training through phases 1-3 and the final phase.
inline PhasePlan default_phase_plan(std::size_t num_layers = 12) {
  if (num_layers != 12) {
    throw ValidationError("default phase plan needs 12 layers, spec has " +
                          std::to_string(num_layers));
  }
  PhasePlan plan;
  plan.num_layers = 12;
  plan.phases = {
      {"gastrulation", {4, 5}, {}, 30, 1.0},
      {"neurulation", {1, 2, 4, 5}, {{4, 1}, {5, 2}}, 20, 1.0},
      {"organogenesis", {4, 5, 8, 9}, {{4, 8}, {5, 9}}, 20, 1.0},
      {"growth", {7, 10}, {{5, 7}, {9, 10}}, 12, 1.0},
      {"connective", {0, 3, 6, 11}, {}, 6, 0.5},
      {"maturation", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, {}, 15, 1.0},
  };
  std::set<int> trained;
  for (std::size_t i = 0; i < 4; ++i) {
    trained.insert(plan.phases[i].trainable.begin(), plan.phases[i].trainable.end());
  }
  auto& connective = plan.phases[4];
  for (int dst : connective.trainable) {
    const int src = nearest_in(dst, trained);
    connective.clones.push_back({src, dst});
    plan.notes.push_back("connective clone source L" + std::to_string(src) + " -> L" +
                         std::to_string(dst) + " chosen as nearest trained neighbor");
  }
  return plan;
}

// Sum of epochs over the phases in which each layer trains.
inline std::vector<double> effective_epochs(const PhasePlan& plan) {
  std::vector<double> out(plan.num_layers, 0.0);
  for (const auto& p : plan.phases) {
    for (int l : p.trainable) out[static_cast<std::size_t>(l)] += p.epochs;
  }
  return out;
}

// Splits `budget` optimizer steps across phases in proportion to their
// epochs. Every training phase gets at least one step and the rounding
// remainder goes to the last training phase, so the sum is exact.
inline std::vector<std::size_t> phase_steps(const PhasePlan& plan, std::size_t budget) {
  std::size_t training = 0;
  double total_epochs = 0.0;
  for (const auto& p : plan.phases) {
    if (p.epochs > 0) {
      ++training;
      total_epochs += p.epochs;
    }
  }
  if (budget < plan.phases.size() || budget < training) {
    throw ValidationError("step budget " + std::to_string(budget) + " is smaller than the " +
                          std::to_string(plan.phases.size()) + " phases");
  }
  std::vector<std::size_t> steps(plan.phases.size(), 0);
  std::size_t last = plan.phases.size();
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < plan.phases.size(); ++i) {
    if (plan.phases[i].epochs == 0) continue;
    last = i;
    steps[i] = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(static_cast<double>(budget) * plan.phases[i].epochs / total_epochs)));
    assigned += steps[i];
  }
  assigned -= steps[last];
  while (assigned >= budget) {  // only reachable for tiny budgets
    auto it = std::max_element(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(last));
    --*it;
    --assigned;
  }
  steps[last] = budget - assigned;
  return steps;
}

// Copies layer src into dst. Attention matrices copy exactly, MLP matrices
// are truncated or zero-padded to the destination width, every component
// gets Gaussian noise of std noise_fraction * std(component), and the MLP
// is then scaled by ffn_scale. Layer norms copy exactly.
inline void clone_layer(Model& m, int src, int dst, double noise_fraction = 0.02,
                        double ffn_scale = 1.0, std::uint64_t seed = 0) {
  const int n = static_cast<int>(m.num_layers());
  if (src == dst) throw ValidationError("clone_layer: source and destination are both L" +
                                        std::to_string(src));
  if (src < 0 || src >= n || dst < 0 || dst >= n) {
    throw ValidationError("clone_layer: layer out of range");
  }
  Rng rng(derive_seed(seed, "clone", static_cast<std::uint64_t>(dst)));
  for (Component c : kModelComponents) {
    const auto& from = m.tensors()[m.require_slot({src, c})];
    auto& to = m.tensors()[m.require_slot({dst, c})];
    to = is_mlp(c) ? resize_leading(from, to.shape()) : from;
    const double sigma = noise_fraction * mean_std<float>(to.data()).second;
    if (sigma > 0.0) {
      for (auto& v : to.vec()) v = static_cast<float>(v + rng.normal(0.0, sigma));
    }
    if (is_mlp(c) && ffn_scale != 1.0) {
      for (auto& v : to.vec()) v = static_cast<float>(v * ffn_scale);
    }
  }
  const auto& s = m.layer(static_cast<std::size_t>(src));
  const auto& d = m.layer(static_cast<std::size_t>(dst));
  auto& t = m.tensors();
  t[d.ln1_gain] = t[s.ln1_gain];
  t[d.ln1_bias] = t[s.ln1_bias];
  t[d.ln2_gain] = t[s.ln2_gain];
  t[d.ln2_bias] = t[s.ln2_bias];
}

struct GrowthOptions {
  TrainConfig train;
  double clone_noise_fraction = 0.02;
  std::uint64_t seed = 0;
};

namespace detail {

// Shared loop body: trains `steps` steps under `mask`, evaluating every
// eval_every global steps and at `final_step`.
inline void run_steps(Trainer& trainer, BatchStream& stream, Model& model, const Dataset& data,
                      const EvalSet& eval, const std::vector<bool>& mask, std::size_t steps,
                      std::size_t& global_step, std::size_t final_step, std::size_t eval_every,
                      TrainHistory& h) {
  for (std::size_t i = 0; i < steps; ++i) {
    const auto [loss, norm] = trainer.step(stream.next(), mask);
    (void)norm;
    ++global_step;
    h.train.push_back({global_step, loss});
    if ((eval_every && global_step % eval_every == 0) || global_step == final_step) {
      h.evals.push_back(evaluate(model, data, eval, global_step));
    }
  }
}

inline std::vector<bool> layer_mask(const Model& m, const std::set<int>& layers) {
  auto mask = mask_none(m);
  mask_add_globals(m, mask);
  for (int l : layers) mask_add_layer(m, static_cast<std::size_t>(l), mask);
  return mask;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

inline TrainHistory train_growth(Model& model, const PhasePlan& plan, const Dataset& data,
                                 const EvalSet& eval, std::size_t budget,
                                 const GrowthOptions& opt = {}) {
  validate_plan(plan);
  if (plan.num_layers != model.num_layers()) {
    throw ValidationError("phase plan covers " + std::to_string(plan.num_layers) +
                          " layers, model has " + std::to_string(model.num_layers()));
  }
  const auto steps = phase_steps(plan, budget);
  const auto t0 = std::chrono::steady_clock::now();

  TrainHistory h;
  h.protocol = "growth";
  h.seed = opt.seed;
  h.eval_hash = eval.hash_hex();
  h.param_count = param_count(model);
  h.notes = plan.notes;
  h.layer_update_steps.assign(model.num_layers(), 0);

  Trainer trainer(model, opt.train.optimizer, opt.train.clip);
  BatchStream stream = data.train_stream(opt.train.batch_size, opt.seed);
  h.steps_per_epoch = stream.steps_per_epoch();
  std::size_t global = 0;
  for (std::size_t p = 0; p < plan.phases.size(); ++p) {
    const Phase& phase = plan.phases[p];
    PhaseRecord rec{phase.name, global, steps[p],
                    {phase.trainable.begin(), phase.trainable.end()}, {},
                    phase.ffn_scale_on_clone};
    for (const auto& c : phase.clones) {
      clone_layer(model, c.src, c.dst, opt.clone_noise_fraction, phase.ffn_scale_on_clone,
                  derive_seed(opt.seed, "growth-clone", p));
      trainer.reset_slots(model.layer_tensor_indices(static_cast<std::size_t>(c.dst)));
      rec.clones.push_back({c.src, c.dst});
    }
    detail::run_steps(trainer, stream, model, data, eval, detail::layer_mask(model, phase.trainable),
                      steps[p], global, budget, opt.train.eval_every, h);
    for (int l : phase.trainable) h.layer_update_steps[static_cast<std::size_t>(l)] += steps[p];
    h.phases.push_back(std::move(rec));
  }
  h.steps_total = global;
  h.effective_epochs = effective_epochs(plan);
  for (std::size_t s : h.layer_update_steps) {
    h.data_epochs.push_back(static_cast<double>(s) / static_cast<double>(h.steps_per_epoch));
  }
  h.wall_seconds = detail::seconds_since(t0);
  return h;
}

inline TrainHistory train_uniform(Model& model, const Dataset& data, const EvalSet& eval,
                                  std::size_t budget, const GrowthOptions& opt = {}) {
  if (budget == 0) throw ValidationError("step budget must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  TrainHistory h;
  h.protocol = "uniform";
  h.seed = opt.seed;
  h.eval_hash = eval.hash_hex();
  h.param_count = param_count(model);
  Trainer trainer(model, opt.train.optimizer, opt.train.clip);
  BatchStream stream = data.train_stream(opt.train.batch_size, opt.seed);
  h.steps_per_epoch = stream.steps_per_epoch();
  std::set<int> all;
  for (std::size_t l = 0; l < model.num_layers(); ++l) all.insert(static_cast<int>(l));
  std::size_t global = 0;
  detail::run_steps(trainer, stream, model, data, eval, mask_all(model), budget, global, budget,
                    opt.train.eval_every, h);
  h.phases.push_back({"uniform", 0, budget, {all.begin(), all.end()}, {}, 1.0});
  h.steps_total = global;
  h.layer_update_steps.assign(model.num_layers(), budget);
  h.data_epochs.assign(model.num_layers(),
                       static_cast<double>(budget) / static_cast<double>(h.steps_per_epoch));
  h.effective_epochs = h.data_epochs;
  h.wall_seconds = detail::seconds_since(t0);
  return h;
}

// ---------------------------------------------------------------------------
// Budget allocation from importance and recovery data

struct BudgetAllocation {
  std::vector<int> layers;
  std::vector<double> ratio;
  std::vector<std::size_t> steps;
  std::vector<std::string> rule;
  std::size_t bmax = 0;
  std::size_t total_steps = 0;
  std::size_t uniform_steps = 0;

  double reduction_pct() const {
    return uniform_steps ? 100.0 * (1.0 - static_cast<double>(total_steps) /
                                              static_cast<double>(uniform_steps))
                         : 0.0;
  }
};

struct BudgetRule {
  double ratio;
  std::string_view name;
};

inline BudgetRule budget_rule(const ImportanceRecord& imp, const RecoveryCurve& rec,
                              bool boundary) {
  const auto within = [](const std::optional<std::size_t>& s) { return s && *s <= 10; };
  if (rec.improved_below_baseline || imp.degradation_pct < 0.0 || imp.category == Category::anti) {
    return {0.0, "anti"};
  }
  if (imp.category == Category::redundant && within(rec.steps_to[2])) {
    return {0.01, "instant-redundant"};
  }
  if (boundary) return {0.15, "boundary"};
  if (imp.category == Category::redundant || imp.category == Category::minor) {
    return {0.35, imp.category == Category::minor ? "minor" : "slow-redundant"};
  }
  if (within(rec.steps_to[1])) return {0.90, "fast-critical"};
  return {1.00, "slow-critical"};
}

inline BudgetAllocation allocate_budget(const std::vector<ImportanceRecord>& importance,
                                        const std::vector<RecoveryCurve>& recovery,
                                        std::size_t bmax) {
  if (importance.empty()) throw ValidationError("allocate_budget: no layers");
  std::map<int, const RecoveryCurve*> by_layer;
  for (const auto& r : recovery) by_layer[r.layer] = &r;
  std::set<int> imp_layers;
  for (const auto& r : importance) {
    if (!imp_layers.insert(r.layer).second) {
      throw ValidationError("allocate_budget: layer " + std::to_string(r.layer) + " listed twice");
    }
    if (!by_layer.count(r.layer)) {
      throw ValidationError("allocate_budget: no recovery data for layer " +
                            std::to_string(r.layer));
    }
  }
  for (const auto& [l, _] : by_layer) {
    if (!imp_layers.count(l)) {
      throw ValidationError("allocate_budget: no importance data for layer " + std::to_string(l));
    }
  }
  const int first = *imp_layers.begin();
  const int last = *imp_layers.rbegin();
  BudgetAllocation out;
  out.bmax = bmax;
  std::vector<const ImportanceRecord*> sorted;
  for (const auto& r : importance) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->layer < b->layer; });
  for (const auto* imp : sorted) {
    const auto rule =
        budget_rule(*imp, *by_layer.at(imp->layer), imp->layer == first || imp->layer == last);
    const auto s = static_cast<std::size_t>(std::llround(rule.ratio * static_cast<double>(bmax)));
    out.layers.push_back(imp->layer);
    out.ratio.push_back(rule.ratio);
    out.rule.emplace_back(rule.name);
    out.steps.push_back(s);
    out.total_steps += s;
  }
  out.uniform_steps = bmax * sorted.size();
  return out;
}

// ---------------------------------------------------------------------------
// Growth vs uniform comparison

struct Completion {
  std::string prompt;
  std::string growth;
  std::string uniform;
};

struct ComparisonReport {
  double growth_val_loss = 0.0;
  double uniform_val_loss = 0.0;
  double ratio = 0.0;  // uniform / growth
  double growth_seconds = 0.0;
  double uniform_seconds = 0.0;
  std::size_t growth_steps = 0;
  std::size_t uniform_steps = 0;
  double step_pct = 0.0;  // growth steps as a percentage of uniform steps
  std::size_t growth_params = 0;
  std::size_t uniform_params = 0;
  std::vector<double> growth_epochs;
  std::vector<double> uniform_epochs;
  std::string eval_hash;
  std::vector<Completion> completions;
};

inline ComparisonReport compare(const TrainHistory& growth, const TrainHistory& uniform,
                                const EvalSet& eval) {
  if (growth.eval_hash != uniform.eval_hash || growth.eval_hash != eval.hash_hex()) {
    throw ValidationError("compare: eval-set hash mismatch (growth " + growth.eval_hash +
                          ", uniform " + uniform.eval_hash + ", eval " + eval.hash_hex() + ")");
  }
  if (growth.evals.empty() || uniform.evals.empty()) {
    throw ValidationError("compare: a history has no evaluations");
  }
  ComparisonReport r;
  r.growth_val_loss = growth.final_val_loss();
  r.uniform_val_loss = uniform.final_val_loss();
  r.ratio = r.uniform_val_loss / r.growth_val_loss;
  r.growth_seconds = growth.wall_seconds;
  r.uniform_seconds = uniform.wall_seconds;
  r.growth_steps = growth.steps_total;
  r.uniform_steps = uniform.steps_total;
  r.step_pct = uniform.steps_total ? 100.0 * static_cast<double>(growth.steps_total) /
                                         static_cast<double>(uniform.steps_total)
                                   : 0.0;
  r.growth_params = growth.param_count;
  r.uniform_params = uniform.param_count;
  r.growth_epochs = growth.effective_epochs;
  r.uniform_epochs = uniform.effective_epochs;
  r.eval_hash = eval.hash_hex();
  return r;
}

inline std::string complete_prompt(const Model& m, const Vocabulary& vocab,
                                   const std::string& prompt, std::size_t max_new = 8) {
  std::vector<int> ids{vocab.bos()};
  for (int id : vocab.encode(prompt)) ids.push_back(id);
  return vocab.decode(greedy_decode(m, ids, vocab.eos(), max_new));
}

}  // namespace layeranat
