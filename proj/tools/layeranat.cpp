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

// layeranat: train desk-scale decoders, run layer-anatomy diagnostics,
// allocate growth budgets and render reports.
//
// Exit codes: 0 success, 1 validation failure, 2 training divergence.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "layeranat/layeranat.hpp"

namespace la = layeranat;
using la::json;

namespace {

struct ModelFlags {
  std::size_t dim = 192;
  std::size_t heads = 4;
  std::size_t block = 64;
};

struct TrainFlags {
  std::string corpus;
  std::string eval;
  std::string out = "run";
  std::string checkpoint_out;
  std::size_t steps = 656;
  std::size_t batch = 16;
  std::size_t eval_every = 50;
  double lr = 1e-3;
  double clip = 1.0;
  double weight_decay = 0.01;
  double clone_noise = 0.02;
  std::uint64_t seed = 0;
  ModelFlags model;
};

struct Options {
  TrainFlags train;

  // compare
  std::string growth_history, uniform_history, growth_ckpt, uniform_ckpt, prompts;
  std::size_t max_new = 8;

  // diagnostics
  std::string checkpoint, corpus, eval, out = "diag";
  std::uint64_t seed = 0;
  bool csv = false;
  std::string component = "all";
  std::vector<int> targets;
  std::vector<int> replace;
  std::size_t k = 10000;
  double lambda = 1.0;
  std::size_t k_components = 5;
  std::string strategy = "scale";
  double alpha = 0.9;
  std::size_t neighbors = 4;
  std::string from_importance;
  double noise_scale = 0.5;
  std::size_t max_steps = 200;
  std::size_t recover_eval_every = 10;
  double recover_lr = 1e-4;
  double recover_clip = 1.0;
  std::size_t batch = 16;
  std::vector<int> layers;

  // budget / report
  std::string importance, recovery, input;
  std::size_t bmax = 200;
};

std::string csv_list(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void emit(const std::string& prefix, const la::Provenance& prov, const json& result,
          const std::string& summary) {
  la::write_json(prefix + ".json", la::envelope(prov, result));
  la::write_text(prefix + ".txt", summary);
  std::cout << summary;
  std::cout << "wrote " << prefix << ".json, " << prefix << ".txt\n";
}

void write_timing(const std::string& prefix, double seconds) {
  la::write_json(prefix + ".timing.json", json{{"wall_seconds", seconds}});
}

double read_timing(const std::string& history_path) {
  std::string base = history_path;
  if (base.size() > 5 && base.substr(base.size() - 5) == ".json") base.resize(base.size() - 5);
  const std::string path = base + ".timing.json";
  if (!std::filesystem::exists(path)) return 0.0;
  return la::read_json_file(path).value("wall_seconds", 0.0);
}

la::LoadedCheckpoint load_with_vocab(const std::string& path) {
  auto ck = la::load_checkpoint(path);
  if (!ck.has_vocab) throw la::ValidationError(path + ": checkpoint carries no vocabulary");
  return ck;
}

la::EvalSet load_eval(const la::Vocabulary& vocab, const std::string& path) {
  return la::make_eval_set(vocab, la::read_text_file(path));
}

std::string hash_of(const la::Model& m) { return la::hex64(la::model_hash(m)); }

// ---------------------------------------------------------------------------

int run_train(const TrainFlags& f, bool growth) {
  const std::string text = la::read_text_file(f.corpus);
  const auto data = la::Dataset::from_text(text, f.model.block, f.seed);
  const auto eval = load_eval(data.vocab, f.eval);
  const auto spec = la::growth_spec(data.vocab.size(), f.model.dim, f.model.heads, f.model.block);
  la::validate_spec(spec);
  la::GrowthOptions opt;
  opt.seed = f.seed;
  opt.clone_noise_fraction = f.clone_noise;
  opt.train.optimizer.lr = f.lr;
  opt.train.optimizer.weight_decay = f.weight_decay;
  opt.train.clip = f.clip;
  opt.train.batch_size = f.batch;
  opt.train.eval_every = f.eval_every;

  la::Model model = la::Model::build(growth ? spec : la::uniform_twin(spec), f.seed);
  const auto h = growth ? la::train_growth(model, la::default_phase_plan(spec.num_layers()), data,
                                           eval, f.steps, opt)
                        : la::train_uniform(model, data, eval, f.steps, opt);
  const std::string ckpt = f.checkpoint_out.empty() ? f.out + ".bin" : f.checkpoint_out;
  la::save_checkpoint(model, ckpt, &data.vocab);

  la::Provenance prov;
  prov.command = growth ? "train-growth" : "train-uniform";
  prov.seed = f.seed;
  prov.eval_hash = eval.hash_hex();
  prov.checkpoint_hash = hash_of(model);
  prov.config = {{"corpus", f.corpus},
                 {"corpus_hash", la::hex64(data.corpus_hash)},
                 {"eval", f.eval},
                 {"spec", la::spec_to_json(spec)},
                 {"steps", f.steps},
                 {"batch", f.batch},
                 {"eval_every", f.eval_every},
                 {"optimizer", {{"name", "adamw"}, {"lr", f.lr}, {"betas", {0.9, 0.999}},
                                {"eps", 1e-8}, {"weight_decay", f.weight_decay}, {"clip", f.clip}}},
                 {"activation", "gelu-tanh"},
                 {"clone_noise_fraction", f.clone_noise},
                 {"checkpoint", ckpt}};

  std::ostringstream s;
  s << prov.command << ": " << h.steps_total << " steps (" << h.steps_per_epoch
    << " steps/epoch), " << h.param_count << " parameters\n";
  s << "final val loss " << la::fmt("%.4f", h.final_val_loss()) << ", eval ppl "
    << la::fmt("%.3f", h.final_ppl()) << ", wall " << la::fmt("%.1f", h.wall_seconds) << " s\n";
  la::Table t{{"layer", "effective epochs", "data epochs", "update steps"}, {}};
  for (std::size_t l = 0; l < h.effective_epochs.size(); ++l) {
    t.rows.push_back({"L" + std::to_string(l), la::fmt("%.1f", h.effective_epochs[l]),
                      la::fmt("%.2f", h.data_epochs[l]), std::to_string(h.layer_update_steps[l])});
  }
  s << t.text();
  for (const auto& n : h.notes) s << "note: " << n << "\n";
  emit(f.out, prov, la::to_json(h), s.str());
  write_timing(f.out, h.wall_seconds);
  std::cout << "checkpoint " << ckpt << "\n";
  return 0;
}

int run_compare(const Options& o) {
  const auto gdoc = la::read_json_file(o.growth_history);
  const auto udoc = la::read_json_file(o.uniform_history);
  auto g = la::history_from_json(gdoc);
  auto u = la::history_from_json(udoc);
  g.wall_seconds = read_timing(o.growth_history);
  u.wall_seconds = read_timing(o.uniform_history);

  la::EvalSet eval;
  std::string ckpt_hash;
  std::vector<std::string> prompts;
  if (!o.prompts.empty()) prompts = la::split_lines(la::read_text_file(o.prompts));
  la::ComparisonReport r;
  if (!o.growth_ckpt.empty() && !o.uniform_ckpt.empty()) {
    const auto gc = load_with_vocab(o.growth_ckpt);
    const auto uc = load_with_vocab(o.uniform_ckpt);
    eval = load_eval(gc.vocab, o.eval);
    r = la::compare(g, u, eval);
    for (const auto& p : prompts) {
      r.completions.push_back({p, la::complete_prompt(gc.model, gc.vocab, p, o.max_new),
                               la::complete_prompt(uc.model, uc.vocab, p, o.max_new)});
    }
    ckpt_hash = hash_of(gc.model) + "+" + hash_of(uc.model);
  } else {
    // Without checkpoints only the eval text hash is checked.
    const auto sentences = la::split_lines(la::read_text_file(o.eval));
    std::vector<std::string> kept;
    for (const auto& sline : sentences) {
      if (!sline.empty()) kept.push_back(sline);
    }
    eval.sentences = kept;
    eval.hash = la::eval_text_hash(kept);
    r = la::compare(g, u, eval);
  }
  la::Provenance prov;
  prov.command = "compare";
  prov.seed = g.seed;
  prov.eval_hash = eval.hash_hex();
  prov.checkpoint_hash = ckpt_hash;
  prov.config = {{"growth_history", o.growth_history}, {"uniform_history", o.uniform_history},
                 {"growth_checkpoint", o.growth_ckpt}, {"uniform_checkpoint", o.uniform_ckpt},
                 {"prompts", o.prompts}, {"max_new", o.max_new}};
  const auto table = la::comparison_table(r);
  if (o.csv) la::write_text(o.out + ".csv", table.csv());
  emit(o.out, prov, la::to_json(r), la::comparison_summary(r));
  return 0;
}

// ---------------------------------------------------------------------------
// diagnostics

la::Provenance diag_provenance(const std::string& cmd, const Options& o, const la::Model& m,
                               const std::string& eval_hash) {
  la::Provenance p;
  p.command = cmd;
  p.seed = o.seed;
  p.eval_hash = eval_hash;
  p.checkpoint_hash = hash_of(m);
  p.config = {{"checkpoint", o.checkpoint}, {"eval", o.eval}};
  return p;
}

int run_ablate(const Options& o) {
  const auto ck = load_with_vocab(o.checkpoint);
  const auto eval = load_eval(ck.vocab, o.eval);
  const auto map = la::ablation_map(ck.model, eval, ck.vocab.pad());
  auto prov = diag_provenance("diag ablate", o, ck.model, eval.hash_hex());
  prov.config["unknown_eval_tokens"] = eval.unknown_tokens;
  std::vector<json> rows;
  for (const auto& r : map.records) rows.push_back(la::to_json(r));
  la::write_jsonl(o.out + ".jsonl", rows);
  const std::string chart = la::render_ascii_importance(map.records);
  la::write_text(o.out + ".chart.txt", chart);
  const auto table = la::importance_table(map);
  if (o.csv) la::write_text(o.out + ".csv", table.csv());
  std::string s = "baseline ppl " + la::fmt("%.4f", map.baseline_ppl) + "\n" + table.text() +
                  "\n" + chart;
  emit(o.out, prov, la::to_json(map), s);
  return 0;
}

std::vector<la::Component> selected_components(const std::string& name) {
  if (name == "all") return {la::kModelComponents.begin(), la::kModelComponents.end()};
  const auto c = la::parse_component(name);
  if (c == la::Component::gate_proj) {
    throw la::ValidationError("component gate_proj is reserved but absent in this architecture");
  }
  return {c};
}

int run_predict(const Options& o) {
  const auto ck = load_with_vocab(o.checkpoint);
  const auto& m = ck.model;
  auto prov = diag_provenance("diag predict", o, m, "");
  prov.config.update({{"component", o.component}, {"targets", o.targets}, {"k", o.k},
                      {"lambda", o.lambda}, {"replace", o.replace}});
  std::vector<int> targets = o.targets;
  if (targets.empty()) {
    for (std::size_t t = 2; t < m.num_layers(); ++t) targets.push_back(static_cast<int>(t));
  }
  json records = json::array();
  std::vector<json> rows;
  la::Table t{{"component", "t", "R2", "cosine", "note"}, {}};
  for (auto c : selected_components(o.component)) {
    for (int target : targets) {
      const auto rec = la::predictability(m, c, static_cast<std::size_t>(target), o.k, o.lambda, o.seed);
      records.push_back(la::to_json(rec));
      rows.push_back(la::to_json(rec));
      t.rows.push_back({rec.component, std::to_string(target),
                        rec.r_squared ? la::fmt("%.4f", *rec.r_squared) : "undefined",
                        la::fmt("%.4f", rec.cosine), rec.restricted_range ? "common range" : ""});
    }
  }
  json result = {{"records", records}};
  std::string s = t.text();
  if (!o.replace.empty()) {
    const auto eval = load_eval(ck.vocab, o.eval);
    prov.eval_hash = eval.hash_hex();
    const auto rr = la::predict_and_replace(m, {o.replace.begin(), o.replace.end()}, eval,
                                            ck.vocab.pad(), o.lambda);
    result["replace"] = la::to_json(rr);
    result["replace"]["layers"] = o.replace;
    s += "\npredict-and-replace {" + csv_list(o.replace) + "}: ppl " + la::fmt("%.4f", rr.ppl) +
         " (baseline " + la::fmt("%.4f", rr.baseline_ppl) + ", D " +
         la::fmt("%+.1f%%", rr.degradation_pct) + ")\n";
  }
  la::write_jsonl(o.out + ".jsonl", rows);
  if (o.csv) la::write_text(o.out + ".csv", t.csv());
  emit(o.out, prov, result, s);
  return 0;
}

int run_structure(const Options& o) {
  const auto ck = load_with_vocab(o.checkpoint);
  const auto& m = ck.model;
  auto prov = diag_provenance("diag structure", o, m, "");
  prov.config.update({{"component", o.component}, {"k_components", o.k_components}, {"samples", o.k}});
  json result = json::object();
  la::Table t{{"component", "mean delta rho", "iid reference", "top PC ratio"}, {}};
  for (auto c : selected_components(o.component)) {
    const auto dc = la::delta_correlation(m, c);
    const auto ss = la::structure_summary(m, c, o.k_components, o.k, o.seed);
    const std::string name(la::component_name(c));
    result[name] = {{"delta_correlation", la::to_json(dc)}, {"structure", la::to_json(ss)}};
    t.rows.push_back({name, dc.mean ? la::fmt("%+.4f", *dc.mean) : "undefined", "-0.5000",
                      ss.explained_variance.empty() ? "" : la::fmt("%.4f", ss.explained_variance[0])});
  }
  if (o.csv) la::write_text(o.out + ".csv", t.csv());
  emit(o.out, prov, result, t.text());
  return 0;
}

int run_manipulate(const Options& o) {
  const auto ck = load_with_vocab(o.checkpoint);
  const auto eval = load_eval(ck.vocab, o.eval);
  la::ManipulationSpec spec;
  spec.strategy = la::parse_strategy(o.strategy);
  spec.alpha = o.alpha;
  spec.neighbor_count = o.neighbors;
  spec.targets = {o.targets.begin(), o.targets.end()};
  if (!o.from_importance.empty()) {
    const auto doc = la::read_json_file(o.from_importance);
    for (const auto& r : la::unwrap_records(doc, "records")) {
      const auto rec = la::importance_from_json(r);
      if (rec.category == la::Category::redundant) spec.targets.insert(rec.layer);
    }
  }
  const auto r = la::manipulate(ck.model, spec, eval, ck.vocab.pad());
  auto prov = diag_provenance("diag manipulate", o, ck.model, eval.hash_hex());
  prov.config.update({{"strategy", o.strategy}, {"alpha", o.alpha}, {"neighbors", o.neighbors},
                      {"targets", std::vector<int>(spec.targets.begin(), spec.targets.end())},
                      {"from_importance", o.from_importance}});
  std::string s = std::string(la::strategy_name(spec.strategy)) + " on {" +
                  csv_list({spec.targets.begin(), spec.targets.end()}) + "}: ppl " +
                  la::fmt("%.4f", r.ppl) + " (baseline " + la::fmt("%.4f", r.baseline_ppl) +
                  ", D " + la::fmt("%+.1f%%", r.degradation_pct) + ")\n";
  for (const auto& n : r.notes) s += "note: " + n + "\n";
  emit(o.out, prov, la::to_json(r), s);
  return 0;
}

int run_recover(const Options& o) {
  const auto ck = load_with_vocab(o.checkpoint);
  const auto data = la::Dataset::from_text(la::read_text_file(o.corpus), ck.model.spec().block, o.seed);
  if (data.vocab.tokens() != ck.vocab.tokens()) {
    throw la::ValidationError("corpus vocabulary differs from the checkpoint's vocabulary");
  }
  const auto eval = load_eval(ck.vocab, o.eval);
  std::vector<int> layers = o.layers;
  if (layers.empty()) {
    for (std::size_t l = 0; l < ck.model.num_layers(); ++l) layers.push_back(static_cast<int>(l));
  }
  la::RecoveryConfig cfg;
  cfg.noise_scale = o.noise_scale;
  cfg.max_steps = o.max_steps;
  cfg.eval_every = o.recover_eval_every;
  cfg.lr = o.recover_lr;
  cfg.clip = o.recover_clip;
  cfg.batch_size = o.batch;
  cfg.seed = la::derive_seed(o.seed, "recovery");

  std::vector<la::RecoveryCurve> curves(layers.size());
  la::parallel_for(layers.size(), [&](std::size_t, std::size_t i) {
    curves[i] = la::recovery_probe(ck.model, static_cast<std::size_t>(layers[i]), data, eval, cfg);
  });
  json records = json::array();
  std::vector<json> rows;
  json artifacts = json::object();
  for (const auto& c : curves) {
    records.push_back(la::to_json(c));
    rows.push_back(la::to_json(c));
    la::Model recovered = ck.model;
    for (la::Component comp : la::kModelComponents) {
      const la::ComponentId id{c.layer, comp};
      la::set_weights(recovered, id, c.recovered.at(id.name()));
    }
    const std::string path = o.out + ".L" + std::to_string(c.layer) + ".recovered.bin";
    la::save_checkpoint(recovered, path, &ck.vocab);
    artifacts["L" + std::to_string(c.layer)] = path;
  }
  auto prov = diag_provenance("diag recover", o, ck.model, eval.hash_hex());
  prov.config.update({{"corpus", o.corpus}, {"layers", layers}, {"noise_scale", o.noise_scale},
                      {"max_steps", o.max_steps}, {"eval_every", o.recover_eval_every},
                      {"lr", o.recover_lr}, {"clip", o.recover_clip}, {"batch", o.batch}});
  la::write_jsonl(o.out + ".jsonl", rows);
  const auto table = la::recovery_table(curves);
  if (o.csv) la::write_text(o.out + ".csv", table.csv());
  std::string s = "baseline ppl " + la::fmt("%.4f", curves.empty() ? 0.0 : curves[0].baseline_ppl) +
                  "\n" + table.text();
  emit(o.out, prov, {{"records", records}, {"recovered_checkpoints", artifacts}}, s);
  for (const auto& c : curves) {
    if (c.diverged) return 2;
  }
  return 0;
}

int run_budget(const Options& o) {
  const auto idoc = la::read_json_file(o.importance);
  const auto rdoc = la::read_json_file(o.recovery);
  std::vector<la::ImportanceRecord> imp;
  std::vector<la::RecoveryCurve> rec;
  try {
    for (const auto& j : la::unwrap_records(idoc, "records")) imp.push_back(la::importance_from_json(j));
    for (const auto& j : la::unwrap_records(rdoc, "records")) rec.push_back(la::recovery_from_json(j));
  } catch (const json::exception& e) {
    throw la::FormatError(std::string("budget inputs: ") + e.what());
  }
  const auto b = la::allocate_budget(imp, rec, o.bmax);
  la::Provenance prov;
  prov.command = "budget";
  prov.seed = o.seed;
  prov.eval_hash = idoc.value("eval_hash", "");
  prov.checkpoint_hash = idoc.value("checkpoint_hash", "");
  prov.config = {{"importance", o.importance}, {"recovery", o.recovery}, {"bmax", o.bmax}};
  const auto table = la::budget_table(b);
  if (o.csv) la::write_text(o.out + ".csv", table.csv());
  std::string s = table.text() + "reduction " + la::fmt("%.1f%%", b.reduction_pct()) + "\n";
  emit(o.out, prov, la::to_json(b), s);
  return 0;
}

// Re-renders the text table of any artifact written by this tool.
int run_report(const Options& o) {
  const auto doc = la::read_json_file(o.input);
  const std::string cmd = doc.value("command", "");
  const json& r = doc.contains("result") ? doc["result"] : doc;
  la::Table t;
  std::string extra;
  if (cmd == "diag ablate") {
    la::ImportanceMap m;
    m.baseline_ppl = r.value("baseline_ppl", 0.0);
    for (const auto& j : r.at("records")) m.records.push_back(la::importance_from_json(j));
    t = la::importance_table(m);
    extra = "\n" + la::render_ascii_importance(m.records);
  } else if (cmd == "diag recover") {
    std::vector<la::RecoveryCurve> curves;
    for (const auto& j : r.at("records")) {
      auto c = la::recovery_from_json(j);
      c.ppl_after_noise = j.value("ppl_after_noise", 0.0);
      c.diverged = j.value("diverged", false);
      curves.push_back(c);
    }
    t = la::recovery_table(curves);
  } else if (cmd == "budget") {
    la::BudgetAllocation b;
    b.bmax = r.at("bmax").get<std::size_t>();
    b.total_steps = r.at("total-steps").get<std::size_t>();
    b.uniform_steps = r.at("uniform-steps").get<std::size_t>();
    for (const auto& l : r.at("layers")) {
      b.layers.push_back(l.at("layer").get<int>());
      b.ratio.push_back(l.at("ratio").get<double>());
      b.steps.push_back(l.at("steps").get<std::size_t>());
      b.rule.push_back(l.at("rule").get<std::string>());
    }
    t = la::budget_table(b);
  } else if (cmd == "train-growth" || cmd == "train-uniform") {
    const auto h = la::history_from_json(doc);
    t = {{"step", "val loss", "eval ppl"}, {}};
    for (const auto& e : h.evals) {
      t.rows.push_back({std::to_string(e.step), la::fmt("%.4f", e.val_loss), la::fmt("%.3f", e.ppl)});
    }
  } else if (cmd == "compare") {
    la::ComparisonReport c;
    c.growth_val_loss = r.at("growth_val_loss").get<double>();
    c.uniform_val_loss = r.at("uniform_val_loss").get<double>();
    c.ratio = r.at("ratio").get<double>();
    c.growth_steps = r.at("growth_steps").get<std::size_t>();
    c.uniform_steps = r.at("uniform_steps").get<std::size_t>();
    c.step_pct = r.at("growth_step_pct").get<double>();
    t = la::comparison_table(c);
  } else {
    throw la::ValidationError(o.input + ": no table renderer for command '" + cmd + "'");
  }
  std::cout << (o.csv ? t.csv() : t.text() + extra);
  return 0;
}

void add_model_flags(CLI::App* app, ModelFlags& m) {
  app->add_option("--dim", m.dim, "model width")->capture_default_str();
  app->add_option("--heads", m.heads, "attention heads")->capture_default_str();
  app->add_option("--block", m.block, "context length")->capture_default_str();
}

void add_train_flags(CLI::App* app, TrainFlags& f) {
  app->add_option("--corpus", f.corpus, "training corpus (one sentence per line)")
      ->required()->check(CLI::ExistingFile);
  app->add_option("--eval", f.eval, "evaluation sentences")->required()->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "artifact prefix")->capture_default_str();
  app->add_option("--checkpoint-out", f.checkpoint_out, "checkpoint path (default <out>.bin)");
  app->add_option("--steps", f.steps, "optimizer step budget")->capture_default_str();
  app->add_option("--batch", f.batch, "batch size")->capture_default_str();
  app->add_option("--eval-every", f.eval_every, "evaluation cadence in steps")->capture_default_str();
  app->add_option("--lr", f.lr, "AdamW learning rate")->capture_default_str();
  app->add_option("--clip", f.clip, "gradient clip norm")->capture_default_str();
  app->add_option("--weight-decay", f.weight_decay)->capture_default_str();
  app->add_option("--clone-noise", f.clone_noise, "clone noise as a fraction of component std")
      ->capture_default_str();
  app->add_option("--seed", f.seed, "root seed")->capture_default_str();
  add_model_flags(app, f.model);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layeranat: layer anatomy and growth training for small decoders"};
  app.set_version_flag("--version", std::string(la::kToolVersion));
  app.require_subcommand(1);
  Options o;

  auto* tu = app.add_subcommand("train-uniform", "train every layer on every step");
  add_train_flags(tu, o.train);
  auto* tg = app.add_subcommand("train-growth", "six-phase developmental training");
  add_train_flags(tg, o.train);

  auto* cmp = app.add_subcommand("compare", "growth vs uniform report");
  cmp->add_option("--growth", o.growth_history, "growth history JSON")->required()->check(CLI::ExistingFile);
  cmp->add_option("--uniform", o.uniform_history, "uniform history JSON")->required()->check(CLI::ExistingFile);
  cmp->add_option("--eval", o.eval, "evaluation sentences")->required()->check(CLI::ExistingFile);
  cmp->add_option("--growth-checkpoint", o.growth_ckpt)->check(CLI::ExistingFile);
  cmp->add_option("--uniform-checkpoint", o.uniform_ckpt)->check(CLI::ExistingFile);
  cmp->add_option("--prompts", o.prompts, "prompts for greedy completions")->check(CLI::ExistingFile);
  cmp->add_option("--max-new", o.max_new)->capture_default_str();
  cmp->add_option("--out", o.out)->capture_default_str();
  cmp->add_flag("--csv", o.csv, "also write the table as CSV");

  auto* diag = app.add_subcommand("diag", "layer-anatomy diagnostics");
  diag->require_subcommand(1);
  auto common = [&](CLI::App* c, bool needs_eval) {
    c->add_option("--checkpoint", o.checkpoint)->required()->check(CLI::ExistingFile);
    auto* e = c->add_option("--eval", o.eval, "evaluation sentences")->check(CLI::ExistingFile);
    if (needs_eval) e->required();
    c->add_option("--out", o.out, "artifact prefix")->capture_default_str();
    c->add_option("--seed", o.seed)->capture_default_str();
    c->add_flag("--csv", o.csv, "also write the table as CSV");
  };
  auto* ab = diag->add_subcommand("ablate", "neighbor-average importance map");
  common(ab, true);
  auto* pr = diag->add_subcommand("predict", "ridge predictability of weights from layer index");
  common(pr, false);
  pr->add_option("--component", o.component, "component name or 'all'")->capture_default_str();
  pr->add_option("--targets", o.targets, "target layers (default all >= 2)")->delimiter(',');
  pr->add_option("--k", o.k, "sampled positions")->capture_default_str();
  pr->add_option("--lambda", o.lambda, "ridge penalty")->capture_default_str();
  pr->add_option("--replace", o.replace, "layers to replace by predictions, then evaluate")
      ->delimiter(',');
  auto* st = diag->add_subcommand("structure", "delta correlation, PCA and cosine structure");
  common(st, false);
  st->add_option("--component", o.component)->capture_default_str();
  st->add_option("--k-components", o.k_components)->capture_default_str();
  st->add_option("--samples", o.k)->capture_default_str();
  auto* mp = diag->add_subcommand("manipulate", "replace target layers by a strategy");
  common(mp, true);
  mp->add_option("--strategy", o.strategy, "zero|clone|blend|lowrank-blend|scale")->capture_default_str();
  mp->add_option("--targets", o.targets)->delimiter(',');
  mp->add_option("--from-importance", o.from_importance, "use redundant layers of an importance map")
      ->check(CLI::ExistingFile);
  mp->add_option("--alpha", o.alpha)->capture_default_str();
  mp->add_option("--neighbors", o.neighbors)->capture_default_str();
  auto* rc = diag->add_subcommand("recover", "recovery speed after noise injection");
  common(rc, true);
  rc->add_option("--corpus", o.corpus)->required()->check(CLI::ExistingFile);
  rc->add_option("--layers", o.layers)->delimiter(',');
  rc->add_option("--noise-scale", o.noise_scale)->capture_default_str();
  rc->add_option("--max-steps", o.max_steps)->capture_default_str();
  rc->add_option("--eval-every", o.recover_eval_every)->capture_default_str();
  rc->add_option("--lr", o.recover_lr)->capture_default_str();
  rc->add_option("--clip", o.recover_clip)->capture_default_str();
  rc->add_option("--batch", o.batch)->capture_default_str();

  auto* bud = app.add_subcommand("budget", "per-layer training budget from diagnostics");
  bud->add_option("--importance", o.importance)->required()->check(CLI::ExistingFile);
  bud->add_option("--recovery", o.recovery)->required()->check(CLI::ExistingFile);
  bud->add_option("--bmax", o.bmax, "maximum steps per layer")->capture_default_str();
  bud->add_option("--out", o.out)->capture_default_str();
  bud->add_flag("--csv", o.csv);

  auto* rep = app.add_subcommand("report", "render the table of an artifact");
  rep->add_option("input", o.input)->required()->check(CLI::ExistingFile);
  rep->add_flag("--csv", o.csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*tu) return run_train(o.train, false);
    if (*tg) return run_train(o.train, true);
    if (*cmp) return run_compare(o);
    if (*ab) return run_ablate(o);
    if (*pr) return run_predict(o);
    if (*st) return run_structure(o);
    if (*mp) return run_manipulate(o);
    if (*rc) return run_recover(o);
    if (*bud) return run_budget(o);
    if (*rep) return run_report(o);
  } catch (const la::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 2;
  } catch (const la::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
