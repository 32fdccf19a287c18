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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "layeranat/layeranat.hpp"

namespace {

using namespace layeranat;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

const std::string& corpus() {
  static const std::string t = read_text_file(std::string(LAYERANAT_DATA_DIR) + "/corpus.txt");
  return t;
}

const std::string& eval_lines() {
  static const std::string t = read_text_file(std::string(LAYERANAT_DATA_DIR) + "/eval.txt");
  return t;
}

// Desk-scale growth architecture used by the training criteria.
constexpr std::size_t kDim = 64, kHeads = 4, kBlock = 32, kBatch = 16;

struct Setup {
  Dataset data;
  EvalSet eval;
  Model model;
};

Setup desk_setup(std::uint64_t seed, std::size_t dim = kDim, std::size_t block = kBlock) {
  Setup s;
  s.data = Dataset::from_text(corpus(), block, seed);
  s.eval = make_eval_set(s.data.vocab, eval_lines());
  s.model = Model::build(growth_spec(s.data.vocab.size(), dim, kHeads, block), seed);
  return s;
}

bool bit_equal(const Tensor<float>& a, const Tensor<float>& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(float)) == 0;
}

// 1. Finite-difference gradient check over random op graphs.
Outcome autodiff() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::size_t kGraphs = 121;
  double worst = 0.0;
  std::string worst_op;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < kGraphs; ++i) {
    const auto r = gradcheck::random_graph(i, derive_seed(1, "acceptance-gradcheck", i));
    if (!(r.max_rel_error < 1e-4)) ++failures;
    if (!(r.max_rel_error <= worst)) {
      worst = r.max_rel_error;
      worst_op = r.op;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {failures == 0 && secs < 30.0,
          format("%zu graphs over %zu ops, worst rel error %.2e (%s), %zu failing, %.1f s",
                 kGraphs, gradcheck::kOpCount, worst, worst_op.c_str(), failures, secs)};
}

// 2. Zero output head gives uniform logits, so PPL equals the vocab size.
Outcome uniform_logits() {
  auto s = desk_setup(2);
  s.model.tensors()[s.model.head()].fill(0.0f);
  const double ppl = perplexity(s.model, s.eval, s.data.vocab.pad());
  const double v = static_cast<double>(s.data.vocab.size());
  return {std::abs(ppl - v) <= 1e-3, format("PPL %.6f vs vocab %.0f", ppl, v)};
}

// 3. Category labels of the 30-layer importance table.
Outcome table_labels() {
  using C = Category;
  struct Row {
    double d;
    C label;
  };
  // L17 is the table's anti-layer (negative D); it is expected as anti.
  const Row rows[30] = {
      {0.0, C::redundant},     {2737.1, C::critical}, {186.0, C::critical},
      {13.4, C::redundant},    {22.7, C::minor},      {8.3, C::redundant},
      {9.4, C::redundant},     {20.3, C::minor},      {2395.6, C::critical},
      {378.1, C::critical},    {9870.7, C::critical}, {63419.2, C::critical},
      {6.3, C::redundant},     {24.4, C::minor},      {5.0, C::redundant},
      {11.1, C::minor},        {20.3, C::minor},      {-0.6, C::anti},
      {16.9, C::minor},        {2.6, C::redundant},   {25.9, C::minor},
      {23.5, C::minor},        {27.8, C::minor},      {66.6, C::important},
      {115.2, C::critical},    {23.2, C::minor},      {19.4, C::minor},
      {134.8, C::critical},    {211.5, C::critical},  {0.0, C::redundant}};
  std::size_t match = 0;
  std::string misses;
  for (int l = 0; l < 30; ++l) {
    const C got = classify(rows[l].d);
    if (got == rows[l].label) {
      ++match;
    } else {
      misses += format(" L%d D=%.1f table=%s classify=%s;", l, rows[l].d,
                       std::string(category_name(rows[l].label)).c_str(),
                       std::string(category_name(got)).c_str());
    }
  }
  return {match == 30, format("%zu/30 labels match", match) + misses};
}

// 4. Ridge predictability on stacks W_l = a + b*l + c*sin(l*pi/N) + d*cos(l*pi/N).
Outcome ridge_oracle() {
  constexpr double kLambda = 1e-6;
  double min_r2 = 1.0, min_cos = 1.0;
  std::size_t checked = 0;
  for (std::size_t n : {12u, 30u}) {
    Rng rng(derive_seed(4, "ridge-stack", n));
    const std::size_t rows = 40, cols = 50;
    std::vector<Eigen::RowVectorXd> beta(rows * cols, Eigen::RowVectorXd(5));
    for (auto& b : beta) {
      for (int i = 0; i < 5; ++i) b(i) = i == 1 ? 0.0 : rng.normal(0.0, 1.0);
    }
    std::vector<Tensor<float>> layers;
    for (std::size_t l = 0; l < n; ++l) {
      Tensor<float> w({rows, cols});
      const auto x = layer_features(static_cast<double>(l), static_cast<double>(n));
      for (std::size_t p = 0; p < rows * cols; ++p) w[p] = static_cast<float>(x.dot(beta[p]));
      layers.push_back(std::move(w));
    }
    std::vector<const Tensor<float>*> ptrs;
    for (const auto& w : layers) ptrs.push_back(&w);
    const auto stack = make_stack(ptrs);
    for (std::size_t t = 5; t < n; ++t) {
      const auto rec = predictability(stack, t, n, rows * cols, kLambda, 4);
      min_r2 = std::min(min_r2, rec.r_squared.value_or(-INFINITY));
      min_cos = std::min(min_cos, rec.cosine);
      ++checked;
    }
  }
  // Adversarial: the target layer is the negated extrapolation, so the
  // prediction error is twice the signal and R^2 = 1 - 4 sum(a^2) / SST.
  const std::size_t n = 12, t = 8, P = 400;
  Rng rng(derive_seed(4, "ridge-adversarial"));
  std::vector<Eigen::RowVectorXd> beta(P, Eigen::RowVectorXd(5));
  for (auto& b : beta) {
    for (int i = 0; i < 5; ++i) b(i) = rng.normal(0.0, 1.0);
  }
  std::vector<Tensor<float>> layers(t + 1, Tensor<float>({20, 20}));
  std::vector<double> actual(P);
  for (std::size_t l = 0; l <= t; ++l) {
    const auto x = layer_features(static_cast<double>(l), static_cast<double>(n));
    for (std::size_t p = 0; p < P; ++p) {
      const auto v = static_cast<float>(x.dot(beta[p]));
      layers[l][p] = l == t ? -v : v;
      if (l == t) actual[p] = -static_cast<double>(v);
    }
  }
  double mean = 0.0, sum_sq = 0.0, sst = 0.0;
  for (double a : actual) mean += a / static_cast<double>(P);
  for (double a : actual) {
    sum_sq += a * a;
    sst += (a - mean) * (a - mean);
  }
  const double expected = 1.0 - 4.0 * sum_sq / sst;
  std::vector<const Tensor<float>*> ptrs;
  for (const auto& w : layers) ptrs.push_back(&w);
  const auto adv = predictability(make_stack(ptrs), t, n, P, 1e-9, 4);
  const double r2 = adv.r_squared.value_or(NAN);
  const bool adv_ok = r2 < 0.0 && std::abs(r2 - expected) < 1e-3 * std::abs(expected);
  return {min_r2 >= 0.999 && min_cos >= 0.999 && adv_ok,
          format("lambda %.0e, %zu targets (t >= 5): min R2 %.6f, min cosine %.6f; "
                 "adversarial R2 %.4f (oracle %.4f)",
                 kLambda, checked, min_r2, min_cos, r2, expected)};
}

// 5. Consecutive deltas of i.i.d. layers correlate at -1/2.
Outcome delta_iid() {
  constexpr std::size_t kLayers = 12, kRows = 100, kCols = 100;
  Rng rng(derive_seed(5, "iid-layers"));
  std::vector<Tensor<float>> layers;
  for (std::size_t l = 0; l < kLayers; ++l) {
    Tensor<float> w({kRows, kCols});
    for (auto& v : w.vec()) v = static_cast<float>(rng.normal(0.0, 0.02));
    layers.push_back(std::move(w));
  }
  std::vector<const Tensor<float>*> ptrs;
  for (const auto& w : layers) ptrs.push_back(&w);
  const auto dc = delta_correlation(make_stack(ptrs));
  const double mean = dc.mean.value_or(NAN);
  return {std::abs(mean - DeltaCorrelation::kIidReference) <= 0.02,
          format("%zu layers x %zu entries: mean rho %.4f (analytic -0.5)", kLayers,
                 kRows * kCols, mean)};
}

// 6. Manipulation identities.
Outcome manipulation_identities() {
  auto s = desk_setup(6);
  const int pad = s.data.vocab.pad();
  std::vector<std::string> fails;

  ManipulationSpec one{Strategy::scale, {3, 6}, 1.0};
  const auto r1 = manipulate(s.model, one, s.eval, pad);
  if (r1.ppl != r1.baseline_ppl) fails.push_back("scale 1 changed PPL");

  ManipulationSpec zero_scale{Strategy::scale, {3, 6}, 0.0};
  ManipulationSpec zero{Strategy::zero, {3, 6}};
  const double p0 = manipulate(s.model, zero_scale, s.eval, pad).ppl;
  const double pz = manipulate(s.model, zero, s.eval, pad).ppl;
  if (p0 != pz) fails.push_back(format("scale 0 PPL %.6f vs zero %.6f", p0, pz));

  const auto w = inverse_distance_weights({1, 2, 3, 4});
  const double expect[4] = {0.48, 0.24, 0.16, 0.12};
  double werr = 0.0;
  for (int i = 0; i < 4; ++i) werr = std::max(werr, std::abs(w[static_cast<std::size_t>(i)] - expect[i]));
  if (werr > 1e-12) fails.push_back(format("blend weight error %.2e", werr));

  // Layer 0 blended from layers 1..4 (q_proj widths agree).
  Model work = s.model;
  apply_manipulation(work, s.model, {Strategy::blend, {0}, 0.9, 4});
  const auto& got = work.tensors()[work.require_slot({0, Component::q_proj})];
  double berr = 0.0;
  for (std::size_t j = 0; j < got.numel(); ++j) {
    double acc = 0.0;
    for (int l = 1; l <= 4; ++l) {
      acc += expect[l - 1] * s.model.tensors()[s.model.require_slot({l, Component::q_proj})][j];
    }
    berr = std::max(berr, std::abs(acc - got[j]));
  }
  if (berr > 1e-6) fails.push_back(format("blended tensor error %.2e", berr));

  double lr_err = 0.0;
  for (std::size_t l = 0; l < s.model.num_layers(); ++l) {
    for (Component c : kModelComponents) {
      const auto& orig = s.model.tensors()[s.model.require_slot({static_cast<int>(l), c})];
      const auto rec = lowrank_blend(orig, orig);
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < orig.numel(); ++j) {
        num += (static_cast<double>(rec[j]) - orig[j]) * (static_cast<double>(rec[j]) - orig[j]);
        den += static_cast<double>(orig[j]) * orig[j];
      }
      lr_err = std::max(lr_err, std::sqrt(num / den));
    }
  }
  if (lr_err > 1e-4) fails.push_back(format("lowrank self-blend rel error %.2e", lr_err));

  std::string detail = format(
      "scale1 dPPL %.1e, scale0-zero dPPL %.1e, weight err %.1e, blend err %.1e, "
      "lowrank rel err %.2e",
      r1.ppl - r1.baseline_ppl, p0 - pz, werr, berr, lr_err);
  for (const auto& f : fails) detail += "; " + f;
  return {fails.empty(), detail};
}

// 7. No diagnostic mutates its input model.
Outcome purity() {
  Rng pick(derive_seed(7, "purity"));
  const std::string& text = corpus();
  std::size_t changed = 0, calls = 0;
  std::string first_change;
  for (std::size_t run = 0; run < 20; ++run) {
    const std::uint64_t seed = derive_seed(7, "purity-run", run);
    const std::size_t n = 4 + pick.below(5);
    Dataset data = Dataset::from_text(text, 16, seed);
    const EvalSet eval = make_eval_set(data.vocab, eval_lines());
    ModelSpec spec{{}, 16, 2, data.vocab.size(), 16};
    for (std::size_t l = 0; l < n; ++l) {
      spec.layers.push_back({static_cast<int>(l), LayerRole::redundant, 1 << pick.below(3)});
    }
    const Model model = Model::build(spec, seed);
    const int pad = data.vocab.pad();
    const std::uint64_t before = model_hash(model);
    auto probe = [&](const char* name, const std::function<void()>& fn) {
      fn();
      ++calls;
      if (model_hash(model) != before) {
        if (!changed++) first_change = format("run %zu %s", run, name);
      }
    };
    const int target = 2 + static_cast<int>(pick.below(n - 2));
    const auto strategy = static_cast<Strategy>(pick.below(5));
    probe("ablation", [&] { ablation_map(model, eval, pad); });
    probe("predict-and-replace", [&] { predict_and_replace(model, {target}, eval, pad); });
    probe("manipulate", [&] {
      manipulate(model, {strategy, {target}, pick.uniform(), 1 + pick.below(4)}, eval, pad);
    });
    probe("recovery", [&] {
      RecoveryConfig cfg;
      cfg.max_steps = 2;
      cfg.eval_every = 1;
      cfg.batch_size = 4;
      cfg.seed = seed;
      recovery_probe(model, pick.below(n), data, eval, cfg);
    });
  }
  return {changed == 0,
          format("20 runs, %zu diagnostic calls, %zu hash changes", calls, changed) +
              (changed ? " (first: " + first_change + ")" : "")};
}

// 8. Recovery contract.
Outcome recovery_contract() {
  auto s = desk_setup(8);
  std::vector<std::string> fails;
  const std::size_t layer = 5;

  RecoveryConfig zero;
  zero.noise_scale = 0.0;
  zero.max_steps = 4;
  zero.eval_every = 2;
  zero.seed = 8;
  const auto c0 = recovery_probe(s.model, layer, s.data, s.eval, zero);
  for (const auto& st : c0.steps_to) {
    if (!st || *st != 0) fails.push_back("noise 0 gave nonzero steps-to");
  }

  RecoveryConfig cfg;
  cfg.max_steps = 6;
  cfg.eval_every = 3;
  cfg.seed = 8;
  Model tuned;
  recovery_probe(s.model, layer, s.data, s.eval, cfg, &tuned);
  std::size_t frozen = 0, frozen_changed = 0, trained_changed = 0, trained = 0;
  for (std::size_t i = 0; i < s.model.tensors().size(); ++i) {
    const auto& info = s.model.params()[i];
    const bool trainable = info.layer == static_cast<int>(layer) && info.component.has_value();
    const bool same = bit_equal(s.model.tensors()[i], tuned.tensors()[i]);
    if (trainable) {
      ++trained;
      trained_changed += !same;
    } else {
      ++frozen;
      frozen_changed += !same;
    }
  }
  if (frozen_changed) fails.push_back(format("%zu frozen tensors changed", frozen_changed));
  if (trained_changed != trained) fails.push_back("probed layer left unchanged");

  // Alternating +-s entries have mean 0 and population std exactly s.
  Model synth = s.model;
  std::map<std::string, double> known;
  float s_c = 0.05f;
  for (Component c : kModelComponents) {
    auto& w = synth.tensors()[synth.require_slot({static_cast<int>(layer), c})];
    for (std::size_t j = 0; j < w.numel(); ++j) w[j] = (j % 2) ? -s_c : s_c;
    known[std::string(component_name(c))] = static_cast<double>(s_c);
    s_c *= 1.5f;
  }
  RecoveryConfig probe_cfg = cfg;
  probe_cfg.max_steps = 1;
  probe_cfg.eval_every = 1;
  const auto cs = recovery_probe(synth, layer, s.data, s.eval, probe_cfg);
  double sigma_err = 0.0;
  for (const auto& [name, sd] : known) sigma_err = std::max(sigma_err, std::abs(cs.noise_sigma.at(name) - 0.5 * sd));
  if (sigma_err > 1e-6) fails.push_back(format("sigma error %.2e", sigma_err));

  // The injected perturbation itself has the reported spread.
  Model noisy = synth;
  const auto sig = inject_noise(noisy, layer, 0.5, 8);
  double spread_err = 0.0;
  for (Component c : kModelComponents) {
    const auto slot = synth.require_slot({static_cast<int>(layer), c});
    std::vector<double> diff;
    for (std::size_t j = 0; j < synth.tensors()[slot].numel(); ++j) {
      diff.push_back(static_cast<double>(noisy.tensors()[slot][j]) - synth.tensors()[slot][j]);
    }
    const double sd = mean_std<double>(diff).second;
    const double want = sig.at(std::string(component_name(c)));
    spread_err = std::max(spread_err, std::abs(sd / want - 1.0));
  }
  if (spread_err > 0.05) fails.push_back(format("noise spread off by %.1f%%", 100 * spread_err));

  std::string detail =
      format("noise-0 steps-to {%zu,%zu,%zu}; %zu frozen tensors unchanged of %zu; "
             "sigma max error %.2e; empirical spread within %.2f%%",
             c0.steps_to[0].value_or(99999), c0.steps_to[1].value_or(99999),
             c0.steps_to[2].value_or(99999), frozen - frozen_changed, frozen, sigma_err,
             100 * spread_err);
  for (const auto& f : fails) detail += "; " + f;
  return {fails.empty(), detail};
}

// 9. Budget arithmetic on the 30-layer reference categories.
Outcome budget() {
  const std::string dir = LAYERANAT_TEST_DATA_DIR;
  const auto imp_doc = read_json_file(dir + "/reference_importance.json");
  const auto rec_doc = read_json_file(dir + "/reference_recovery.json");
  std::vector<ImportanceRecord> imp;
  std::vector<RecoveryCurve> rec;
  for (const auto& j : unwrap_records(imp_doc, "records")) imp.push_back(importance_from_json(j));
  for (const auto& j : unwrap_records(rec_doc, "records")) rec.push_back(recovery_from_json(j));
  const auto alloc = allocate_budget(imp, rec, 200);

  // Independent oracle: group midpoints times group sizes.
  const std::map<std::string, std::size_t> midpoint = {
      {"anti", 0},          {"instant", 2},         {"minor", 70},
      {"fast_critical", 180}, {"slow_critical", 200}, {"boundary", 30}};
  std::size_t oracle = 0, per_layer_mismatch = 0;
  for (std::size_t i = 0; i < imp.size(); ++i) {
    const std::size_t want = midpoint.at(imp[i].annotation);
    oracle += want;
    const auto it = std::find(alloc.layers.begin(), alloc.layers.end(), imp[i].layer);
    if (alloc.steps[static_cast<std::size_t>(it - alloc.layers.begin())] != want) ++per_layer_mismatch;
  }
  const std::size_t closed_form = 2 * 0 + 5 * 2 + 11 * 70 + 4 * 180 + 6 * 200 + 2 * 30;
  const bool ok = alloc.total_steps == 2760 && alloc.uniform_steps == 6000 &&
                  oracle == closed_form && alloc.total_steps == oracle && per_layer_mismatch == 0;
  return {ok, format("total %zu vs uniform %zu (%.0f%% reduction); oracle %zu, closed form %zu, "
                     "%zu per-layer mismatches",
                     alloc.total_steps, alloc.uniform_steps, alloc.reduction_pct(), oracle,
                     closed_form, per_layer_mismatch)};
}

// 10. Growth vs uniform at equal parameter count.
Outcome growth_vs_uniform() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t ratio_ok = 0, reduced_ok = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Setup s = desk_setup(seed);
    GrowthOptions opt;
    opt.seed = seed;
    opt.train.batch_size = kBatch;
    opt.train.eval_every = 0;
    const auto plan = default_phase_plan();

    Model g = s.model;
    const double g_full = train_growth(g, plan, s.data, s.eval, 656, opt).final_val_loss();
    Model g_small = s.model;
    const double g_416 = train_growth(g_small, plan, s.data, s.eval, 416, opt).final_val_loss();
    Model u = s.model;
    const double u_full = train_uniform(u, s.data, s.eval, 656, opt).final_val_loss();

    const double ratio = u_full / g_full;
    ratio_ok += ratio >= 1.5;
    reduced_ok += g_416 <= u_full;
    detail += format(" seed %llu: growth656 %.4f growth416 %.4f uniform656 %.4f ratio %.3f;",
                     static_cast<unsigned long long>(seed), g_full, g_416, u_full, ratio);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {ratio_ok == 3 && reduced_ok >= 2 && secs < 900.0,
          format("ratio >= 1.5 in %zu/3, growth416 <= uniform656 in %zu/3, %.0f s;", ratio_ok,
                 reduced_ok, secs) +
              detail};
}

// Closed-form parameter count of the decoder stack.
std::size_t count_params(const ModelSpec& s) {
  const std::size_t d = s.dim;
  std::size_t total = s.vocab * d + s.block * d + 2 * d + d * s.vocab;
  for (const auto& l : s.layers) {
    total += 4 * d * d + 4 * d + 2 * d * static_cast<std::size_t>(l.ffn_mult) * d;
  }
  return total;
}

// 11. Growth and uniform runs report one parameter count.
Outcome parity() {
  const Setup s = desk_setup(11);
  GrowthOptions opt;
  opt.seed = 11;
  opt.train.eval_every = 0;
  opt.train.batch_size = 4;
  Model g = s.model, u = s.model;
  const auto hg = train_growth(g, default_phase_plan(), s.data, s.eval, 12, opt);
  const auto hu = train_uniform(u, s.data, s.eval, 12, opt);
  const std::size_t oracle = count_params(s.model.spec());
  const auto full = growth_spec(s.data.vocab.size());
  const bool ok = hg.param_count == hu.param_count && hg.param_count == oracle &&
                  param_count(full) == param_count(uniform_twin(full)) &&
                  param_count(full) == count_params(full);
  return {ok, format("growth %zu, uniform %zu, closed form %zu; dim-192 spec %zu", hg.param_count,
                     hu.param_count, oracle, param_count(full))};
}

// 12. Effective epochs of the default plan.
Outcome epochs() {
  const auto e = effective_epochs(default_phase_plan());
  bool ok = e.size() == 12;
  if (ok) {
    for (int l : {4, 5}) ok = ok && e[static_cast<std::size_t>(l)] == 85.0;
    for (int l : {0, 3, 6, 11}) ok = ok && e[static_cast<std::size_t>(l)] == 21.0;
  }
  std::ostringstream os;
  for (std::size_t l = 0; l < e.size(); ++l) os << (l ? " " : "") << "L" << l << "=" << e[l];
  return {ok, os.str()};
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"autodiff gradient check", autodiff},
    {"uniform-logit perplexity", uniform_logits},
    {"importance table labels", table_labels},
    {"ridge oracle", ridge_oracle},
    {"delta correlation of i.i.d. layers", delta_iid},
    {"manipulation identities", manipulation_identities},
    {"diagnostic purity", purity},
    {"recovery contract", recovery_contract},
    {"budget arithmetic", budget},
    {"growth vs uniform", growth_vs_uniform},
    {"parameter parity", parity},
    {"effective epochs", epochs},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  constexpr int kCount = static_cast<int>(sizeof(kCriteria) / sizeof(kCriteria[0]));
  if (only < 0 || only > kCount) {
    std::fprintf(stderr, "criterion must be 1..%d\n", kCount);
    return 2;
  }
  int failed = 0;
  for (int i = 1; i <= kCount; ++i) {
    if (only && i != only) continue;
    Outcome o;
    try {
      o = kCriteria[i - 1].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2d %s  %s: %s\n", i, o.pass ? "PASS" : "FAIL", kCriteria[i - 1].name,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
