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

// Small models and data shared by the unit tests.

#include <string>

#include "layeranat/corpus.hpp"
#include "layeranat/model.hpp"

namespace fixtures {

using namespace layeranat;

inline const std::string& corpus_text() {
  static const std::string text = read_text_file(std::string(LAYERANAT_DATA_DIR) + "/corpus.txt");
  return text;
}

inline const std::string& eval_text() {
  static const std::string text = read_text_file(std::string(LAYERANAT_DATA_DIR) + "/eval.txt");
  return text;
}

// n layers with ffn multipliers cycling 1, 2, 4.
inline ModelSpec tiny_spec(std::size_t vocab, std::size_t n = 6, std::size_t dim = 16,
                           std::size_t heads = 2, std::size_t block = 16) {
  ModelSpec s;
  s.dim = dim;
  s.heads = heads;
  s.vocab = vocab;
  s.block = block;
  const int mults[] = {1, 2, 4};
  for (std::size_t i = 0; i < n; ++i) {
    s.layers.push_back({static_cast<int>(i), LayerRole::redundant, mults[i % 3]});
  }
  return s;
}

struct Tiny {
  Dataset data;
  EvalSet eval;
  Model model;
};

inline Tiny tiny(std::uint64_t seed = 0, std::size_t n = 6, std::size_t block = 16) {
  Tiny t;
  t.data = Dataset::from_text(corpus_text(), block, seed);
  t.eval = make_eval_set(t.data.vocab, eval_text());
  t.model = Model::build(tiny_spec(t.data.vocab.size(), n, 16, 2, block), seed);
  return t;
}

}  // namespace fixtures
