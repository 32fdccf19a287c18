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

// Trains a small model on the bundled corpus for a few steps, then prints
// its importance map, delta correlations and a recovery probe.

#include <cstdio>
#include <iostream>

#include "layeranat/layeranat.hpp"

using namespace layeranat;

int main() {
  const std::string dir = LAYERANAT_DATA_DIR;
  const Dataset data = Dataset::from_text(read_text_file(dir + "/corpus.txt"), 32, 1);
  const EvalSet eval = make_eval_set(data.vocab, read_text_file(dir + "/eval.txt"));

  Model model = Model::build(growth_spec(data.vocab.size(), 32, 4, 32), 1);
  GrowthOptions opt;
  opt.seed = 1;
  opt.train.eval_every = 20;
  const auto h = train_uniform(model, data, eval, 60, opt);
  std::printf("trained %zu steps, %zu parameters, val loss %.3f, ppl %.2f\n\n", h.steps_total,
              h.param_count, h.final_val_loss(), h.final_ppl());

  const auto imp = ablation_map(model, eval, data.vocab.pad());
  std::cout << importance_table(imp).text() << "\n"
            << render_ascii_importance(imp.records) << "\n";

  for (Component c : {Component::q_proj, Component::up_proj}) {
    const auto dc = delta_correlation(model, c);
    std::printf("%-8s mean delta correlation %.3f\n", std::string(component_name(c)).c_str(),
                dc.mean.value_or(NAN));
  }

  RecoveryConfig cfg;
  cfg.max_steps = 20;
  cfg.eval_every = 5;
  const auto curve = recovery_probe(model, 2, data, eval, cfg);
  std::printf("\nlayer 2: baseline ppl %.2f, after noise %.2f, final %.2f\n", curve.baseline_ppl,
              curve.ppl_after_noise, curve.final_ppl);
  return 0;
}
