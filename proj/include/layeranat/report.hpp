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

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "layeranat/diagnostics.hpp"
#include "layeranat/error.hpp"
#include "layeranat/growth.hpp"
#include "layeranat/training.hpp"

namespace layeranat {

inline constexpr std::string_view kToolVersion = "0.3.0";

using nlohmann::json;

// NaN and infinities become null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Records to JSON

inline json to_json(const ImportanceRecord& r) {
  return {{"layer", r.layer},
          {"ppl", num(r.ppl_after)},
          {"degradation_pct", num(r.degradation_pct)},
          {"category", category_name(r.category)},
          {"annotation", r.annotation}};
}

inline json to_json(const ImportanceMap& m) {
  json recs = json::array();
  for (const auto& r : m.records) recs.push_back(to_json(r));
  return {{"baseline_ppl", num(m.baseline_ppl)}, {"records", recs}};
}

inline json to_json(const PredictabilityRecord& r) {
  return {{"component", r.component},   {"target_layer", r.target_layer},
          {"r2", opt(r.r_squared)},      {"cosine", num(r.cosine)},
          {"sample_size", r.sample_size}, {"lambda", r.ridge_lambda},
          {"seed", r.seed},              {"restricted_range", r.restricted_range}};
}

inline json to_json(const ReplaceResult& r) {
  return {{"ppl", num(r.ppl)},
          {"baseline_ppl", num(r.baseline_ppl)},
          {"degradation_pct", num(r.degradation_pct)}};
}

inline json to_json(const DeltaCorrelation& d) {
  json gaps = json::array();
  for (const auto& g : d.per_gap) gaps.push_back(opt(g));
  return {{"per_gap", gaps}, {"mean", opt(d.mean)}, {"iid_reference", DeltaCorrelation::kIidReference}};
}

inline json to_json(const StructureSummary& s) {
  return {{"cosine", s.cosine},
          {"explained_variance", s.explained_variance},
          {"sample_size", s.sample_size},
          {"note", s.note}};
}

inline json to_json(const ManipulationResult& r) {
  return {{"ppl", num(r.ppl)},
          {"baseline_ppl", num(r.baseline_ppl)},
          {"degradation_pct", num(r.degradation_pct)},
          {"notes", r.notes}};
}

inline const std::array<std::string_view, 3> kThresholdKeys = {"2.0x", "1.5x", "1.1x"};

inline json to_json(const RecoveryCurve& c) {
  json samples = json::array();
  for (const auto& [step, ppl] : c.samples) samples.push_back({step, num(ppl)});
  json steps_to = json::object();
  for (std::size_t k = 0; k < 3; ++k) steps_to[std::string(kThresholdKeys[k])] = opt(c.steps_to[k]);
  json recovered = json::object();
  for (const auto& [name, t] : c.recovered) recovered[name] = hex64(tensor_hash(t));
  return {{"layer", c.layer},
          {"baseline_ppl", num(c.baseline_ppl)},
          {"ppl_after_noise", num(c.ppl_after_noise)},
          {"samples", samples},
          {"steps_to", steps_to},
          {"final_ppl", num(c.final_ppl)},
          {"improved_below_baseline", c.improved_below_baseline},
          {"diverged", c.diverged},
          {"noise_sigma", c.noise_sigma},
          {"recovered_weight_hash", recovered}};
}

inline json to_json(const TrainHistory& h) {
  json train = json::array();
  for (const auto& s : h.train) train.push_back({s.step, num(s.loss)});
  json evals = json::array();
  for (const auto& e : h.evals) {
    evals.push_back({{"step", e.step}, {"val_loss", num(e.val_loss)}, {"ppl", num(e.ppl)}});
  }
  json phases = json::array();
  for (const auto& p : h.phases) {
    json clones = json::array();
    for (const auto& [s, d] : p.clones) clones.push_back({{"src", s}, {"dst", d}});
    phases.push_back({{"name", p.name},
                      {"start_step", p.start_step},
                      {"steps", p.steps},
                      {"trainable_layers", p.trainable_layers},
                      {"clones", clones},
                      {"ffn_scale_on_clone", p.ffn_scale_on_clone}});
  }
  return {{"protocol", h.protocol},
          {"train", train},
          {"evals", evals},
          {"steps_total", h.steps_total},
          {"steps_per_epoch", h.steps_per_epoch},
          {"effective_epochs", h.effective_epochs},
          {"data_epochs", h.data_epochs},
          {"layer_update_steps", h.layer_update_steps},
          {"phases", phases},
          {"param_count", h.param_count},
          {"eval_hash", h.eval_hash},
          {"seed", h.seed},
          {"notes", h.notes},
          {"final_val_loss", num(h.final_val_loss())},
          {"final_ppl", num(h.final_ppl())}};
}

inline json to_json(const BudgetAllocation& b) {
  json layers = json::array();
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    layers.push_back({{"layer", b.layers[i]},
                      {"ratio", b.ratio[i]},
                      {"steps", b.steps[i]},
                      {"rule", b.rule[i]}});
  }
  return {{"layers", layers},
          {"bmax", b.bmax},
          {"total-steps", b.total_steps},
          {"uniform-steps", b.uniform_steps},
          {"reduction_pct", b.reduction_pct()}};
}

inline json to_json(const ComparisonReport& r) {
  json completions = json::array();
  for (const auto& c : r.completions) {
    completions.push_back({{"prompt", c.prompt}, {"growth", c.growth}, {"uniform", c.uniform}});
  }
  return {{"growth_val_loss", num(r.growth_val_loss)},
          {"uniform_val_loss", num(r.uniform_val_loss)},
          {"ratio", num(r.ratio)},
          {"growth_steps", r.growth_steps},
          {"uniform_steps", r.uniform_steps},
          {"growth_step_pct", r.step_pct},
          {"growth_params", r.growth_params},
          {"uniform_params", r.uniform_params},
          {"growth_effective_epochs", r.growth_epochs},
          {"uniform_effective_epochs", r.uniform_epochs},
          {"eval_hash", r.eval_hash},
          {"completions", completions}};
}

// ---------------------------------------------------------------------------
// Records from JSON (inputs to `budget` and `report`)

// Accepts an artifact envelope, a {records: [...]} object, or a bare array.
inline const json& unwrap_records(const json& j, std::string_view key) {
  const json* cur = &j;
  if (cur->is_object() && cur->contains("result")) cur = &(*cur)["result"];
  if (cur->is_object() && cur->contains(key)) cur = &(*cur)[std::string(key)];
  if (!cur->is_array()) {
    throw FormatError("expected an array of records under '" + std::string(key) + "'");
  }
  return *cur;
}

inline ImportanceRecord importance_from_json(const json& j) {
  ImportanceRecord r;
  r.layer = j.at("layer").get<int>();
  r.degradation_pct = j.at("degradation_pct").get<double>();
  r.category = j.contains("category") ? parse_category(j["category"].get<std::string>())
                                      : classify(r.degradation_pct);
  if (j.contains("ppl") && !j["ppl"].is_null()) r.ppl_after = j["ppl"].get<double>();
  r.annotation = j.value("annotation", "");
  return r;
}

inline RecoveryCurve recovery_from_json(const json& j) {
  RecoveryCurve c;
  c.layer = j.at("layer").get<int>();
  const auto& st = j.at("steps_to");
  for (std::size_t k = 0; k < 3; ++k) {
    const std::string key(kThresholdKeys[k]);
    if (st.contains(key) && !st[key].is_null()) c.steps_to[k] = st[key].get<std::size_t>();
  }
  c.improved_below_baseline = j.value("improved_below_baseline", false);
  c.baseline_ppl = j.contains("baseline_ppl") && !j["baseline_ppl"].is_null()
                       ? j["baseline_ppl"].get<double>()
                       : 0.0;
  c.final_ppl = j.contains("final_ppl") && !j["final_ppl"].is_null() ? j["final_ppl"].get<double>()
                                                                     : 0.0;
  return c;
}

inline TrainHistory history_from_json(const json& doc) {
  const json& j = doc.contains("result") ? doc["result"] : doc;
  try {
    TrainHistory h;
    h.protocol = j.at("protocol").get<std::string>();
    for (const auto& s : j.at("train")) {
      h.train.push_back({s.at(0).get<std::size_t>(), s.at(1).is_null() ? NAN : s.at(1).get<double>()});
    }
    for (const auto& e : j.at("evals")) {
      h.evals.push_back({e.at("step").get<std::size_t>(),
                         e.at("val_loss").is_null() ? NAN : e.at("val_loss").get<double>(),
                         e.at("ppl").is_null() ? NAN : e.at("ppl").get<double>()});
    }
    h.steps_total = j.at("steps_total").get<std::size_t>();
    h.steps_per_epoch = j.at("steps_per_epoch").get<std::size_t>();
    h.effective_epochs = j.at("effective_epochs").get<std::vector<double>>();
    h.data_epochs = j.value("data_epochs", std::vector<double>{});
    h.layer_update_steps = j.at("layer_update_steps").get<std::vector<std::size_t>>();
    h.param_count = j.at("param_count").get<std::size_t>();
    h.eval_hash = j.at("eval_hash").get<std::string>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.notes = j.value("notes", std::vector<std::string>{});
    for (const auto& p : j.at("phases")) {
      PhaseRecord r;
      r.name = p.at("name").get<std::string>();
      r.start_step = p.at("start_step").get<std::size_t>();
      r.steps = p.at("steps").get<std::size_t>();
      r.trainable_layers = p.at("trainable_layers").get<std::vector<int>>();
      for (const auto& c : p.at("clones")) r.clones.push_back({c.at("src").get<int>(), c.at("dst").get<int>()});
      r.ffn_scale_on_clone = p.at("ffn_scale_on_clone").get<double>();
      h.phases.push_back(std::move(r));
    }
    return h;
  } catch (const json::exception& e) {
    throw FormatError(std::string("training history: ") + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Artifact envelope and writers

struct Provenance {
  std::string command;
  json config = json::object();
  std::uint64_t seed = 0;
  std::string eval_hash;
  std::string checkpoint_hash;
};

// Deterministic document: the same provenance and result serialize to the
// same bytes. Wall-clock data is kept out of it.
inline json envelope(const Provenance& p, json result) {
  return {{"tool", "layeranat"},
          {"version", kToolVersion},
          {"command", p.command},
          {"config", p.config},
          {"seed", p.seed},
          {"eval_hash", p.eval_hash},
          {"checkpoint_hash", p.checkpoint_hash},
          {"result", std::move(result)}};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline void write_jsonl(const std::string& path, const std::vector<json>& rows) {
  std::string text;
  for (const auto& r : rows) text += r.dump() + "\n";
  write_text(path, text);
}

// ---------------------------------------------------------------------------
// Tables

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string text() const {
    std::vector<std::size_t> w(header.size(), 0);
    for (std::size_t i = 0; i < header.size(); ++i) w[i] = header[i].size();
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], r[i].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
      std::string s;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::string c = i < cells.size() ? cells[i] : "";
        s += (i ? "  " : "") + c + std::string(w[i] - c.size(), ' ');
      }
      while (!s.empty() && s.back() == ' ') s.pop_back();
      return s + "\n";
    };
    std::string out = line(header);
    std::size_t total = 0;
    for (std::size_t x : w) total += x;
    out += std::string(total + 2 * (w.size() - 1), '-') + "\n";
    for (const auto& r : rows) out += line(r);
    return out;
  }

  std::string csv() const {
    auto esc = [](const std::string& c) {
      if (c.find_first_of(",\"\n") == std::string::npos) return c;
      std::string q = "\"";
      for (char ch : c) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    };
    auto line = [&](const std::vector<std::string>& cells) {
      std::string s;
      for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + esc(cells[i]);
      return s + "\n";
    };
    std::string out = line(header);
    for (const auto& r : rows) out += line(r);
    return out;
  }
};

inline Table importance_table(const ImportanceMap& m) {
  Table t{{"layer", "ppl", "D (%)", "category", "note"}, {}};
  for (const auto& r : m.records) {
    t.rows.push_back({"L" + std::to_string(r.layer), fmt("%.3f", r.ppl_after),
                      fmt("%+.1f", r.degradation_pct), std::string(category_name(r.category)),
                      r.annotation});
  }
  return t;
}

inline Table recovery_table(const std::vector<RecoveryCurve>& curves) {
  auto cell = [](const std::optional<std::size_t>& s) {
    return s ? std::to_string(*s) : std::string("never");
  };
  Table t{{"layer", "ppl after noise", "<2x", "<1.5x", "<1.1x", "final ppl", "flag"}, {}};
  for (const auto& c : curves) {
    t.rows.push_back({"L" + std::to_string(c.layer), fmt("%.3f", c.ppl_after_noise),
                      cell(c.steps_to[0]), cell(c.steps_to[1]), cell(c.steps_to[2]),
                      fmt("%.3f", c.final_ppl),
                      c.diverged ? "diverged" : c.improved_below_baseline ? "improved" : ""});
  }
  return t;
}

inline Table budget_table(const BudgetAllocation& b) {
  Table t{{"layer", "rule", "R", "steps"}, {}};
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    t.rows.push_back({"L" + std::to_string(b.layers[i]), b.rule[i], fmt("%.2f", b.ratio[i]),
                      std::to_string(b.steps[i])});
  }
  t.rows.push_back({"total", "", "", std::to_string(b.total_steps)});
  t.rows.push_back({"uniform", "", "", std::to_string(b.uniform_steps)});
  return t;
}

// Configuration, steps, val loss, time, ratio.
inline Table comparison_table(const ComparisonReport& r) {
  Table t{{"configuration", "steps", "val loss", "time (s)", "ratio"}, {}};
  t.rows.push_back({"uniform", std::to_string(r.uniform_steps), fmt("%.4f", r.uniform_val_loss),
                    fmt("%.1f", r.uniform_seconds), "1.00x"});
  t.rows.push_back({"growth (" + fmt("%.0f", r.step_pct) + "% steps)",
                    std::to_string(r.growth_steps), fmt("%.4f", r.growth_val_loss),
                    fmt("%.1f", r.growth_seconds), fmt("%.2fx", r.ratio)});
  return t;
}

inline std::string comparison_summary(const ComparisonReport& r) {
  std::string s = comparison_table(r).text();
  s += "\nparameters: growth " + std::to_string(r.growth_params) + ", uniform " +
       std::to_string(r.uniform_params) + "\n";
  if (!r.completions.empty()) {
    s += "\ncompletions (greedy):\n";
    for (const auto& c : r.completions) {
      s += "  " + c.prompt + "\n    growth:  " + c.growth + "\n    uniform: " + c.uniform + "\n";
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// ASCII importance chart

// Horizontal bars on a log10(1 + |D|) axis, one row per layer with D > 0,
// then the baseline row, then anti layers (D < 0) drawn below it.
inline std::string render_ascii_importance(const std::vector<ImportanceRecord>& records,
                                           std::size_t cells_per_decade = 8) {
  if (records.empty()) return "";
  auto cells = [&](double d) {
    return static_cast<std::size_t>(
        std::ceil(std::log10(1.0 + std::abs(d)) * static_cast<double>(cells_per_decade)));
  };
  std::size_t width = 4 * cells_per_decade;
  for (const auto& r : records) width = std::max(width, cells(r.degradation_pct));
  const std::size_t decades = (width + cells_per_decade - 1) / cells_per_decade;
  width = decades * cells_per_decade;

  auto row = [](const std::string& label, const std::string& body, const std::string& tail) {
    std::string l = label;
    l.resize(6, ' ');
    return l + "|" + body + tail + "\n";
  };
  std::string out = "Degradation (log scale, % over baseline)\n";
  std::string axis;
  for (std::size_t k = 0; k <= decades; ++k) {
    const std::string tick = k == 0 ? "0" : k == 1 ? "10" : k == 2 ? "100" : "1e" + std::to_string(k);
    const std::size_t at = k * cells_per_decade;
    if (axis.size() < at) axis.resize(at, ' ');
    axis += tick;
  }
  out += "       " + axis + "\n";
  std::vector<std::string> zero;
  for (const auto& r : records) {
    if (r.degradation_pct > 0.0) {
      out += row("L" + std::to_string(r.layer), std::string(cells(r.degradation_pct), '#'),
                 " " + fmt("%+.1f%%", r.degradation_pct));
    } else if (r.degradation_pct == 0.0) {
      zero.push_back("L" + std::to_string(r.layer));
    }
  }
  std::string base = std::string(width, '=') + " baseline";
  if (!zero.empty()) {
    base += " (";
    for (std::size_t i = 0; i < zero.size(); ++i) base += (i ? " " : "") + zero[i];
    base += ")";
  }
  out += row("base", base, "");
  for (const auto& r : records) {
    if (r.degradation_pct < 0.0) {
      out += row("L" + std::to_string(r.layer), std::string(std::max<std::size_t>(1, cells(r.degradation_pct)), 'v'),
                 " " + fmt("%+.1f%% anti", r.degradation_pct));
    }
  }
  return out;
}

}  // namespace layeranat
