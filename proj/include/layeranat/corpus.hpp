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
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "layeranat/error.hpp"
#include "layeranat/rng.hpp"

namespace layeranat {

// Lowercases and splits on whitespace; every punctuation character except
// the apostrophe becomes its own token.
inline std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c) && c != '\'') {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line) blank = blank && std::isspace(static_cast<unsigned char>(c));
    if (!blank) lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Word-level vocabulary. Word ids follow first occurrence; the four special
// ids come after the last word.
class Vocabulary {
 public:
  static constexpr std::string_view kPad = "<pad>";
  static constexpr std::string_view kBos = "<bos>";
  static constexpr std::string_view kEos = "<eos>";
  static constexpr std::string_view kUnk = "<unk>";

  Vocabulary() = default;

  // Rebuilds from a full id->token list (as stored in checkpoints).
  static Vocabulary from_tokens(const std::vector<std::string>& tokens) {
    if (tokens.size() < 5 || tokens[tokens.size() - 4] != kPad ||
        tokens[tokens.size() - 3] != kBos || tokens[tokens.size() - 2] != kEos ||
        tokens.back() != kUnk) {
      throw FormatError("vocabulary: token list must end with the 4 special tokens");
    }
    Vocabulary v;
    for (std::size_t i = 0; i + 4 < tokens.size(); ++i) v.add_word(tokens[i]);
    v.finish();
    return v;
  }

  friend Vocabulary build_vocab(std::string_view corpus);

  int id(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? unk_ : it->second;
  }
  bool contains(std::string_view word) const {
    return index_.count(std::string(word)) > 0;
  }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::size_t size() const { return tokens_.size(); }
  std::size_t word_count() const { return tokens_.size() - 4; }
  int pad() const { return pad_; }
  int bos() const { return bos_; }
  int eos() const { return eos_; }
  int unk() const { return unk_; }
  bool is_special(int id) const { return id >= pad_; }

  // Out-of-vocabulary words map to unk; unknown_count (if given) is bumped.
  std::vector<int> encode(std::string_view text, std::size_t* unknown_count = nullptr) const {
    std::vector<int> ids;
    for (const auto& w : tokenize_words(text)) {
      const int i = id(w);
      if (i == unk_ && unknown_count) ++*unknown_count;
      ids.push_back(i);
    }
    return ids;
  }

  std::string decode(const std::vector<int>& ids) const {
    std::string out;
    for (int i : ids) {
      if (i == pad_) continue;
      if (!out.empty()) out.push_back(' ');
      out += token(i);
    }
    return out;
  }

 private:
  void add_word(const std::string& w) {
    if (index_.count(w)) return;
    index_.emplace(w, static_cast<int>(tokens_.size()));
    tokens_.push_back(w);
  }
  void finish() {
    pad_ = static_cast<int>(tokens_.size());
    bos_ = pad_ + 1;
    eos_ = pad_ + 2;
    unk_ = pad_ + 3;
    for (auto s : {kPad, kBos, kEos, kUnk}) tokens_.emplace_back(s);
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int pad_ = 0, bos_ = 1, eos_ = 2, unk_ = 3;
};

inline Vocabulary build_vocab(std::string_view corpus) {
  Vocabulary v;
  for (const auto& w : tokenize_words(corpus)) v.add_word(w);
  if (v.tokens_.empty()) throw ValidationError("build_vocab: empty corpus");
  v.finish();
  return v;
}

// One sentence per line: <bos> words <eos>.
inline std::vector<int> encode_lines(const Vocabulary& vocab, std::string_view text,
                                     std::size_t* unknown_count = nullptr) {
  std::vector<int> out;
  for (const auto& line : split_lines(text)) {
    auto ids = vocab.encode(line, unknown_count);
    if (ids.empty()) continue;
    out.push_back(vocab.bos());
    out.insert(out.end(), ids.begin(), ids.end());
    out.push_back(vocab.eos());
  }
  return out;
}

// Fixed held-out sentence set. The hash covers the normalized sentence text,
// so any edit to the set changes every downstream report.
struct EvalSet {
  std::vector<std::string> sentences;
  std::vector<std::vector<int>> tokens;  // <bos> words <eos>
  std::size_t unknown_tokens = 0;
  std::uint64_t hash = 0;

  std::size_t size() const { return sentences.size(); }
  std::string hash_hex() const { return hex64(hash); }
  std::size_t predicted_tokens() const {
    std::size_t n = 0;
    for (const auto& t : tokens) n += t.size() - 1;
    return n;
  }
};

inline std::uint64_t eval_text_hash(const std::vector<std::string>& sentences) {
  std::uint64_t h = kFnvOffset;
  for (const auto& s : sentences) {
    std::string norm;
    for (const auto& w : tokenize_words(s)) {
      if (!norm.empty()) norm.push_back(' ');
      norm += w;
    }
    h = fnv1a64(norm, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

inline EvalSet make_eval_set(const Vocabulary& vocab, std::string_view text) {
  EvalSet es;
  for (auto& line : split_lines(text)) {
    auto ids = vocab.encode(line, &es.unknown_tokens);
    if (ids.empty()) continue;
    std::vector<int> seq{vocab.bos()};
    seq.insert(seq.end(), ids.begin(), ids.end());
    seq.push_back(vocab.eos());
    es.tokens.push_back(std::move(seq));
    es.sentences.push_back(std::move(line));
  }
  if (es.sentences.empty()) throw ValidationError("eval set: no sentences");
  es.hash = eval_text_hash(es.sentences);
  return es;
}

struct Batch {
  std::vector<int> inputs;   // batch * seq, row-major
  std::vector<int> targets;  // inputs shifted by one
  std::size_t batch = 0;
  std::size_t seq = 0;
};

// Non-overlapping blocks of a token stream: block i covers
// tokens[i*bs, i*bs+bs] (bs inputs plus the shifted target).
inline std::size_t count_blocks(std::size_t tokens, std::size_t block_size) {
  if (block_size == 0) throw ValidationError("block size must be positive");
  if (tokens <= block_size) {
    throw ValidationError("corpus of " + std::to_string(tokens) +
                          " tokens is not longer than block size " +
                          std::to_string(block_size));
  }
  return (tokens - 1) / block_size;
}

inline void fill_block(const std::vector<int>& tokens, std::size_t block,
                       std::size_t block_size, int* in, int* tgt) {
  const std::size_t start = block * block_size;
  for (std::size_t j = 0; j < block_size; ++j) {
    in[j] = tokens[start + j];
    tgt[j] = tokens[start + j + 1];
  }
}

// Shuffled epochs over a fixed block list; the order of epoch e depends only
// on (seed, e), and a partial trailing batch is dropped.
class BatchStream {
 public:
  BatchStream(const std::vector<int>* tokens, std::vector<std::size_t> blocks,
              std::size_t block_size, std::size_t batch_size, std::uint64_t seed)
      : tokens_(tokens),
        blocks_(std::move(blocks)),
        block_size_(block_size),
        batch_size_(batch_size),
        seed_(seed) {
    if (batch_size_ == 0) throw ValidationError("batch size must be positive");
    if (blocks_.size() < batch_size_) {
      throw ValidationError("only " + std::to_string(blocks_.size()) +
                            " blocks for batch size " + std::to_string(batch_size_));
    }
    reshuffle();
  }

  std::size_t steps_per_epoch() const { return blocks_.size() / batch_size_; }
  std::size_t epoch() const { return epoch_; }
  std::size_t block_size() const { return block_size_; }
  std::size_t batch_size() const { return batch_size_; }

  Batch next() {
    if (cursor_ + batch_size_ > order_.size()) {
      ++epoch_;
      reshuffle();
    }
    Batch b;
    b.batch = batch_size_;
    b.seq = block_size_;
    b.inputs.resize(batch_size_ * block_size_);
    b.targets.resize(batch_size_ * block_size_);
    for (std::size_t i = 0; i < batch_size_; ++i) {
      fill_block(*tokens_, order_[cursor_ + i], block_size_,
                 b.inputs.data() + i * block_size_, b.targets.data() + i * block_size_);
    }
    cursor_ += batch_size_;
    return b;
  }

 private:
  void reshuffle() {
    order_ = blocks_;
    Rng rng(derive_seed(seed_, "batch-order", epoch_));
    rng.shuffle(order_);
    cursor_ = 0;
  }

  const std::vector<int>* tokens_;
  std::vector<std::size_t> blocks_;
  std::vector<std::size_t> order_;
  std::size_t block_size_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0;
  std::size_t cursor_ = 0;
};

// Tokenized training corpus with a seeded 90/10 block split.
struct Dataset {
  Vocabulary vocab;
  std::vector<int> tokens;
  std::size_t block_size = 0;
  std::vector<std::size_t> train_blocks;
  std::vector<std::size_t> val_blocks;
  std::uint64_t corpus_hash = 0;

  static Dataset from_text(std::string_view corpus, std::size_t block_size,
                           std::uint64_t seed, double val_fraction = 0.1) {
    Dataset ds;
    ds.vocab = build_vocab(corpus);
    ds.tokens = encode_lines(ds.vocab, corpus);
    ds.block_size = block_size;
    ds.corpus_hash = fnv1a64(corpus);
    const std::size_t n = count_blocks(ds.tokens.size(), block_size);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(idx);
    auto n_val = static_cast<std::size_t>(static_cast<double>(n) * val_fraction + 0.5);
    if (n >= 2) n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    else n_val = 0;
    ds.val_blocks.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    ds.train_blocks.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    std::sort(ds.val_blocks.begin(), ds.val_blocks.end());
    std::sort(ds.train_blocks.begin(), ds.train_blocks.end());
    return ds;
  }

  BatchStream train_stream(std::size_t batch_size, std::uint64_t seed) const {
    return BatchStream(&tokens, train_blocks, block_size, batch_size, seed);
  }
};

// Stream over every block of a raw token list (no split).
inline BatchStream batchify(const std::vector<int>& tokens, std::size_t block_size,
                            std::size_t batch_size, std::uint64_t seed) {
  const std::size_t n = count_blocks(tokens.size(), block_size);
  std::vector<std::size_t> blocks(n);
  for (std::size_t i = 0; i < n; ++i) blocks[i] = i;
  return BatchStream(&tokens, std::move(blocks), block_size, batch_size, seed);
}

}  // namespace layeranat
