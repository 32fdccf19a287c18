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

#include "fixtures.hpp"
#include "layeranat/model.hpp"
#include "layeranat/training.hpp"

using namespace layeranat;

TEST(GrowthSpec, RolesAndWidths) {
  const auto s = growth_spec(100);
  ASSERT_EQ(s.num_layers(), 12u);
  EXPECT_EQ(s.dim, 192u);
  EXPECT_EQ(s.heads, 4u);
  EXPECT_EQ(s.block, 64u);
  const int mult[] = {1, 4, 4, 1, 4, 4, 1, 2, 4, 4, 2, 1};
  for (std::size_t l = 0; l < 12; ++l) EXPECT_EQ(s.layers[l].ffn_mult, mult[l]) << l;
  EXPECT_EQ(s.layers[7].role, LayerRole::minor);
  EXPECT_EQ(uniform_twin(s), s);
}

TEST(ValidateSpec, RejectsBadSpecs) {
  auto s = growth_spec(50, 64, 4, 16);
  EXPECT_NO_THROW(validate_spec(s));
  auto bad = s;
  bad.heads = 5;
  EXPECT_THROW(validate_spec(bad), ValidationError);
  bad = s;
  bad.layers[3].role = LayerRole::anti;
  EXPECT_THROW(validate_spec(bad), ValidationError);
  bad = s;
  bad.layers[2].ffn_mult = 3;
  EXPECT_THROW(validate_spec(bad), ValidationError);
  bad = s;
  bad.layers[1].index = 7;
  EXPECT_THROW(validate_spec(bad), ValidationError);
  bad = s;
  bad.layers.clear();
  EXPECT_THROW(validate_spec(bad), ValidationError);
}

TEST(ParamCount, ClosedFormMatchesTensors) {
  for (std::size_t dim : {16u, 32u}) {
    const auto spec = growth_spec(37, dim, 4, 8);
    EXPECT_EQ(param_count(spec), param_count(Model::build(spec, 1)));
  }
}

TEST(Model, SameSeedSameWeights) {
  const auto spec = fixtures::tiny_spec(30);
  EXPECT_EQ(model_hash(Model::build(spec, 3)), model_hash(Model::build(spec, 3)));
  EXPECT_NE(model_hash(Model::build(spec, 3)), model_hash(Model::build(spec, 4)));
}

TEST(Model, WeightAccessors) {
  auto m = Model::build(fixtures::tiny_spec(30), 0);
  const ComponentId up{2, Component::up_proj};
  EXPECT_EQ(get_weights(m, up).shape(), (Shape{16, 64}));
  EXPECT_EQ(up.name(), "layers.2.up_proj");
  EXPECT_THROW(set_weights(m, up, Tensor<float>({16, 16})), ShapeError);
  EXPECT_THROW(get_weights(m, {2, Component::gate_proj}), ValidationError);
  EXPECT_THROW(get_weights(m, {9, Component::q_proj}), ValidationError);
  EXPECT_EQ(parse_component("down_proj"), Component::down_proj);
  EXPECT_THROW(parse_component("w1"), ValidationError);
}

TEST(Model, ForwardIsCausal) {
  const auto m = Model::build(fixtures::tiny_spec(30, 3), 2);
  std::vector<int> ids{1, 5, 7, 2, 9, 4, 3, 8};
  const auto leaves = make_leaves(m);
  const auto a = forward_logits(m, leaves, ids, 1, ids.size()).value();
  for (std::size_t p = 1; p < ids.size(); ++p) {
    auto moved = ids;
    for (std::size_t j = p; j < ids.size(); ++j) moved[j] = (moved[j] + 11) % 30;
    const auto b = forward_logits(m, leaves, moved, 1, moved.size()).value();
    for (std::size_t t = 0; t < p; ++t) {
      for (std::size_t v = 0; v < 30; ++v) ASSERT_EQ(a.at(t, v), b.at(t, v)) << p << " " << t;
    }
  }
}

TEST(Model, ForwardRejectsBadSequence) {
  const auto m = Model::build(fixtures::tiny_spec(30, 2, 16, 2, 4), 0);
  const auto leaves = make_leaves(m);
  std::vector<int> ids(5, 1);
  EXPECT_THROW(forward_logits(m, leaves, ids, 1, 5), ShapeError);
  EXPECT_THROW(forward_logits(m, leaves, ids, 2, 3), ShapeError);
}

TEST(Perplexity, ConstantLogitsGiveVocabSize) {
  auto t = fixtures::tiny(0, 2);
  t.model.tensors()[t.model.head()].fill(0.0f);
  EXPECT_NEAR(perplexity(t.model, t.eval, t.data.vocab.pad()),
              static_cast<double>(t.data.vocab.size()), 1e-6);
}

TEST(Perplexity, DeterministicAndPadIndependent) {
  auto t = fixtures::tiny(1, 2);
  const int pad = t.data.vocab.pad();
  const double a = perplexity(t.model, t.eval, pad);
  EXPECT_EQ(a, perplexity(t.model, t.eval, pad));
  // Padding never leaks into a sentence because attention is causal and pads trail.
  EXPECT_EQ(a, perplexity(t.model, t.eval, t.data.vocab.unk()));
  EXPECT_THROW(perplexity(t.model, t.eval, -1), ValidationError);
}

TEST(Perplexity, MatchesPerSentenceEvaluation) {
  auto t = fixtures::tiny(2, 2);
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& s : t.eval.tokens) {
    const auto r = sentence_nll(t.model, {s}, t.data.vocab.pad());
    total += r[0].first;
    count += r[0].second;
  }
  EXPECT_EQ(count, t.eval.predicted_tokens());
  EXPECT_NEAR(std::exp(total / static_cast<double>(count)),
              perplexity(t.model, t.eval, t.data.vocab.pad()), 1e-3);
}

TEST(Training, LossDecreasesOnTinyModel) {
  auto t = fixtures::tiny(3, 2);
  Trainer trainer(t.model, AdamWConfig{.lr = 3e-3}, 1.0);
  auto stream = t.data.train_stream(8, 0);
  const auto mask = mask_all(t.model);
  const double first = trainer.step(stream.next(), mask).first;
  double last = first;
  for (int i = 0; i < 40; ++i) last = trainer.step(stream.next(), mask).first;
  EXPECT_LT(last, first - 0.5);
}

TEST(Training, FrozenTensorsAndSlotsUntouched) {
  auto t = fixtures::tiny(4, 3);
  Trainer trainer(t.model, AdamWConfig{.lr = 1e-3}, 1.0);
  auto mask = mask_none(t.model);
  mask_add_layer(t.model, 1, mask);
  const auto before0 = layer_hash(t.model, 0), before2 = layer_hash(t.model, 2);
  const auto before1 = layer_hash(t.model, 1);
  auto stream = t.data.train_stream(4, 0);
  for (int i = 0; i < 3; ++i) trainer.step(stream.next(), mask);
  EXPECT_EQ(layer_hash(t.model, 0), before0);
  EXPECT_EQ(layer_hash(t.model, 2), before2);
  EXPECT_NE(layer_hash(t.model, 1), before1);
  for (std::size_t i : t.model.layer_tensor_indices(0)) {
    EXPECT_EQ(trainer.optimizer().slot(i).steps, 0);
  }
  EXPECT_EQ(trainer.optimizer().slot(t.model.head()).steps, 0);
}

TEST(Training, MaskedComponentsExcludeNorms) {
  const auto m = Model::build(fixtures::tiny_spec(30, 2), 0);
  auto mask = mask_none(m);
  mask_add_layer_components(m, 1, mask);
  std::size_t on = 0;
  for (bool b : mask) on += b;
  EXPECT_EQ(on, 6u);
}

TEST(GreedyDecode, RespectsBudget) {
  auto t = fixtures::tiny(5, 2);
  const auto out = greedy_decode(t.model, {t.data.vocab.bos()}, -1, 5);
  EXPECT_EQ(out.size(), 5u);
  EXPECT_EQ(out, greedy_decode(t.model, {t.data.vocab.bos()}, -1, 5));
}
