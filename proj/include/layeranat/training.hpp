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

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "layeranat/autograd.hpp"
#include "layeranat/corpus.hpp"
#include "layeranat/error.hpp"
#include "layeranat/model.hpp"
#include "layeranat/optim.hpp"

namespace layeranat {

struct TrainConfig {
  AdamWConfig optimizer{.lr = 1e-3};
  double clip = 1.0;
  std::size_t batch_size = 16;
  std::size_t eval_every = 50;
};

// Trainable-tensor masks.
inline std::vector<bool> mask_none(const Model& m) {
  return std::vector<bool>(m.tensors().size(), false);
}

inline std::vector<bool> mask_all(const Model& m) {
  return std::vector<bool>(m.tensors().size(), true);
}

// Embeddings, final norm and output head.
inline void mask_add_globals(const Model& m, std::vector<bool>& mask) {
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    if (m.params()[i].layer < 0) mask[i] = true;
  }
}

inline void mask_add_layer(const Model& m, std::size_t layer, std::vector<bool>& mask) {
  for (std::size_t i : m.layer_tensor_indices(layer)) mask[i] = true;
}

inline void mask_add_layer_components(const Model& m, std::size_t layer,
                                      std::vector<bool>& mask) {
  for (std::size_t i : m.layer_tensor_indices(layer)) {
    if (m.params()[i].component) mask[i] = true;
  }
}

// One optimizer over every model tensor; each step updates only the tensors
// in the given mask, leaving frozen values and optimizer slots untouched.
class Trainer {
 public:
  Trainer(Model& model, AdamWConfig config, double clip)
      : model_(&model), optimizer_(config, shapes(model)), clip_(clip) {}

  // Returns the batch loss and the pre-clip gradient norm.
  std::pair<double, double> step(const Batch& batch, const std::vector<bool>& trainable) {
    auto leaves = make_leaves(*model_, trainable);
    const Var logits = forward_logits(*model_, leaves, batch.inputs, batch.batch, batch.seq);
    const Var loss = ag::cross_entropy(logits, std::span<const int>(batch.targets));
    const double value = loss.value()[0];
    if (!std::isfinite(value)) {
      throw DivergenceError("non-finite training loss at optimizer step " +
                            std::to_string(optimizer_.step_count() + 1));
    }
    ag::backward(loss);

    auto& tensors = model_->tensors();
    std::vector<Tensor<float>*> params(tensors.size());
    std::vector<const Tensor<float>*> grads(tensors.size(), nullptr);
    std::vector<Tensor<float>*> clip_set;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      params[i] = &tensors[i];
      if (i >= trainable.size() || !trainable[i]) continue;
      auto* node = leaves[i].node();
      node->grad_buffer();  // unreached trainable tensors get a zero grad
      grads[i] = &node->grad;
      clip_set.push_back(&node->grad);
    }
    const double norm = clip_grad_norm<float>(clip_set, clip_);
    if (!std::isfinite(norm)) {
      throw DivergenceError("non-finite gradient norm at optimizer step " +
                            std::to_string(optimizer_.step_count() + 1));
    }
    optimizer_.step(params, grads);
    return {value, norm};
  }

  void reset_slots(const std::vector<std::size_t>& indices) {
    for (std::size_t i : indices) optimizer_.reset_slot(i);
  }

  AdamW<float>& optimizer() { return optimizer_; }

 private:
  static std::vector<Shape> shapes(const Model& m) {
    std::vector<Shape> out;
    for (const auto& t : m.tensors()) out.push_back(t.shape());
    return out;
  }

  Model* model_;
  AdamW<float> optimizer_;
  double clip_;
};

struct StepLoss {
  std::size_t step = 0;
  double loss = 0.0;
};

struct EvalPoint {
  std::size_t step = 0;
  double val_loss = 0.0;
  double ppl = 0.0;
};

struct PhaseRecord {
  std::string name;
  std::size_t start_step = 0;
  std::size_t steps = 0;
  std::vector<int> trainable_layers;
  std::vector<std::pair<int, int>> clones;  // (src, dst)
  double ffn_scale_on_clone = 1.0;
};

struct TrainHistory {
  std::string protocol;  // "growth" or "uniform"
  std::vector<StepLoss> train;
  std::vector<EvalPoint> evals;
  double wall_seconds = 0.0;
  std::size_t steps_total = 0;
  std::size_t steps_per_epoch = 0;
  std::vector<double> effective_epochs;       // per layer, plan epochs while trainable
  std::vector<double> data_epochs;            // per layer, passes over the training blocks
  std::vector<std::size_t> layer_update_steps;  // optimizer steps each layer received
  std::vector<PhaseRecord> phases;
  std::size_t param_count = 0;
  std::string eval_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;

  double final_val_loss() const { return evals.empty() ? NAN : evals.back().val_loss; }
  double final_ppl() const { return evals.empty() ? NAN : evals.back().ppl; }
};

inline EvalPoint evaluate(const Model& m, const Dataset& data, const EvalSet& eval,
                          std::size_t step) {
  return {step, blocks_loss(m, data.tokens, data.val_blocks, data.block_size),
          perplexity(m, eval, data.vocab.pad())};
}

}  // namespace layeranat
