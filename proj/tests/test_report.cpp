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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "layeranat/report.hpp"

using namespace layeranat;

namespace {

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("layeranat_report_" + name)).string();
}

}  // namespace

TEST(Envelope, CarriesClosureAndIsByteStable) {
  Provenance p{"diag ablate", {{"checkpoint", "m.bin"}}, 7, "abc", "def"};
  const json r = {{"x", 1.5}};
  const auto e = envelope(p, r);
  EXPECT_EQ(e["tool"], "layeranat");
  EXPECT_EQ(e["version"], std::string(kToolVersion));
  EXPECT_EQ(e["seed"], 7);
  EXPECT_EQ(e["eval_hash"], "abc");
  EXPECT_EQ(e["checkpoint_hash"], "def");
  write_json(tmp("a.json"), envelope(p, r));
  write_json(tmp("b.json"), envelope(p, r));
  EXPECT_EQ(slurp(tmp("a.json")), slurp(tmp("b.json")));
}

TEST(Json, NonFiniteBecomesNull) {
  EXPECT_TRUE(num(NAN).is_null());
  EXPECT_TRUE(num(INFINITY).is_null());
  EXPECT_EQ(num(2.5), 2.5);
}

TEST(Json, ImportanceRoundTrip) {
  ImportanceRecord r{3, 12.5, 25.0, Category::minor, "boundary"};
  const auto back = importance_from_json(to_json(r));
  EXPECT_EQ(back.layer, 3);
  EXPECT_EQ(back.ppl_after, 12.5);
  EXPECT_EQ(back.category, Category::minor);
  EXPECT_EQ(back.annotation, "boundary");
  // Category is derived from D when absent.
  EXPECT_EQ(importance_from_json({{"layer", 1}, {"degradation_pct", 150.0}}).category,
            Category::critical);
}

TEST(Json, RecoveryRoundTrip) {
  RecoveryCurve c;
  c.layer = 2;
  c.steps_to = {0, 10, std::nullopt};
  c.improved_below_baseline = true;
  c.baseline_ppl = 4.0;
  c.final_ppl = 3.9;
  c.recovered["layers.2.q_proj"] = Tensor<float>({2, 2}, 1.0f);
  const auto j = to_json(c);
  EXPECT_TRUE(j["steps_to"]["1.1x"].is_null());
  EXPECT_EQ(j["steps_to"]["1.5x"], 10);
  EXPECT_TRUE(j["recovered_weight_hash"]["layers.2.q_proj"].is_string());
  const auto back = recovery_from_json(j);
  EXPECT_EQ(back.steps_to, c.steps_to);
  EXPECT_TRUE(back.improved_below_baseline);
  EXPECT_EQ(back.final_ppl, 3.9);
}

TEST(Json, HistoryRoundTripThroughEnvelope) {
  TrainHistory h;
  h.protocol = "growth";
  h.train = {{1, 5.0}, {2, 4.5}};
  h.evals = {{2, 4.4, 81.0}};
  h.steps_total = 2;
  h.steps_per_epoch = 70;
  h.effective_epochs = {21, 85};
  h.data_epochs = {0.1, 0.2};
  h.layer_update_steps = {1, 2};
  h.phases = {{"gastrulation", 0, 2, {4, 5}, {{1, 0}}, 1.0}};
  h.param_count = 99;
  h.eval_hash = "ff";
  h.seed = 3;
  const auto back = history_from_json(envelope({"train-growth", {}, 3, "ff", ""}, to_json(h)));
  EXPECT_EQ(back.protocol, "growth");
  EXPECT_EQ(back.final_val_loss(), 4.4);
  EXPECT_EQ(back.effective_epochs, h.effective_epochs);
  EXPECT_EQ(back.phases[0].clones[0], (std::pair<int, int>{1, 0}));
  EXPECT_THROW(history_from_json(json{{"protocol", "growth"}}), FormatError);
}

TEST(Json, UnwrapRecords) {
  const json arr = json::array({1, 2});
  EXPECT_EQ(unwrap_records(arr, "records").size(), 2u);
  EXPECT_EQ(unwrap_records(json{{"records", arr}}, "records").size(), 2u);
  EXPECT_EQ(unwrap_records(json{{"result", {{"records", arr}}}}, "records").size(), 2u);
  EXPECT_THROW(unwrap_records(json{{"result", 3}}, "records"), FormatError);
}

TEST(Json, ReadErrors) {
  EXPECT_THROW(read_json_file(tmp("missing.json")), ValidationError);
  write_text(tmp("bad.json"), "{not json");
  EXPECT_THROW(read_json_file(tmp("bad.json")), FormatError);
}

TEST(Budget, JsonKeys) {
  BudgetAllocation b;
  b.layers = {0};
  b.ratio = {0.15};
  b.steps = {30};
  b.rule = {"boundary"};
  b.bmax = 200;
  b.total_steps = 30;
  b.uniform_steps = 200;
  const auto j = to_json(b);
  EXPECT_EQ(j["total-steps"], 30);
  EXPECT_EQ(j["uniform-steps"], 200);
  EXPECT_NEAR(j["reduction_pct"].get<double>(), 85.0, 1e-12);
}

TEST(Table, TextAndCsv) {
  Table t{{"a", "bb"}, {{"1", "x,y"}, {"long", ""}}};
  EXPECT_EQ(t.text(), "a     bb\n---------\n1     x,y\nlong\n");
  EXPECT_EQ(t.csv(), "a,bb\n1,\"x,y\"\nlong,\n");
}

TEST(Table, ComparisonColumns) {
  ComparisonReport r;
  r.uniform_steps = 656;
  r.growth_steps = 416;
  r.step_pct = 63.4;
  r.ratio = 4.72;
  const auto t = comparison_table(r);
  EXPECT_EQ(t.header, (std::vector<std::string>{"configuration", "steps", "val loss", "time (s)", "ratio"}));
  EXPECT_EQ(t.rows[1][0], "growth (63% steps)");
  EXPECT_EQ(t.rows[1][4], "4.72x");
}

TEST(AsciiChart, LayoutAndOrdering) {
  std::vector<ImportanceRecord> recs{{0, 0, 5200.0, Category::critical, ""},
                                     {1, 0, 9.0, Category::redundant, ""},
                                     {2, 0, 0.0, Category::redundant, ""},
                                     {3, 0, -4.0, Category::anti, ""}};
  const auto s = render_ascii_importance(recs, 4);
  std::vector<std::string> lines;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "Degradation (log scale, % over baseline)");
  // log10(5201) * 4 = 14.9 -> 15 cells; log10(10) * 4 = 4 cells.
  EXPECT_EQ(lines[2], "L0    |" + std::string(15, '#') + " +5200.0%");
  EXPECT_EQ(lines[3], "L1    |####" " +9.0%");
  EXPECT_EQ(lines[4].rfind("base  |====", 0), 0u);
  EXPECT_NE(lines[4].find("baseline (L2)"), std::string::npos);
  EXPECT_EQ(lines[5].rfind("L3    |vvv", 0), 0u);
  EXPECT_NE(lines[5].find("anti"), std::string::npos);
  EXPECT_EQ(render_ascii_importance({}), "");
}
