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

// Checkpoint file layout:
//   line 1: LAYERANAT1
//   line 2: JSON manifest {format, spec, seed, vocab, components: [{name,
//           offset, shape}], blob_bytes}
//   rest:   concatenated little-endian float32 blobs; offsets are relative
//           to the first blob byte.

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "layeranat/corpus.hpp"
#include "layeranat/error.hpp"
#include "layeranat/model.hpp"

namespace layeranat {

inline constexpr std::string_view kCheckpointMagic = "LAYERANAT1";

inline nlohmann::json spec_to_json(const ModelSpec& s) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : s.layers) {
    layers.push_back({{"index", l.index}, {"role", role_name(l.role)}, {"ffn_mult", l.ffn_mult}});
  }
  return {{"dim", s.dim}, {"heads", s.heads}, {"vocab", s.vocab}, {"block", s.block},
          {"layers", layers}};
}

inline ModelSpec spec_from_json(const nlohmann::json& j) {
  try {
    ModelSpec s;
    s.dim = j.at("dim").get<std::size_t>();
    s.heads = j.at("heads").get<std::size_t>();
    s.vocab = j.at("vocab").get<std::size_t>();
    s.block = j.at("block").get<std::size_t>();
    for (const auto& l : j.at("layers")) {
      s.layers.push_back({l.at("index").get<int>(), parse_role(l.at("role").get<std::string>()),
                          l.at("ffn_mult").get<int>()});
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model spec: ") + e.what());
  }
}

struct LoadedCheckpoint {
  Model model;
  Vocabulary vocab;
  bool has_vocab = false;
};

inline void save_checkpoint(const Model& m, const std::string& path,
                            const Vocabulary* vocab = nullptr) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint writer assumes a little-endian host");
  nlohmann::json comps = nlohmann::json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < m.tensors().size(); ++i) {
    const auto& t = m.tensors()[i];
    comps.push_back({{"name", m.params()[i].name}, {"offset", offset}, {"shape", t.shape()}});
    offset += t.numel() * sizeof(float);
  }
  nlohmann::json manifest = {{"format", kCheckpointMagic},
                             {"spec", spec_to_json(m.spec())},
                             {"seed", m.seed()},
                             {"components", comps},
                             {"blob_bytes", offset}};
  if (vocab) manifest["vocab"] = vocab->tokens();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write checkpoint: " + path);
  out << kCheckpointMagic << '\n' << manifest.dump() << '\n';
  for (const auto& t : m.tensors()) {
    out.write(reinterpret_cast<const char*>(t.raw()),
              static_cast<std::streamsize>(t.numel() * sizeof(float)));
  }
  if (!out) throw ValidationError("short write to checkpoint: " + path);
}

namespace detail {

inline LoadedCheckpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read checkpoint: " + path);
  std::string magic, manifest_line;
  std::getline(in, magic);
  if (magic != kCheckpointMagic) {
    throw FormatError(path + ": unknown checkpoint version header '" +
                      magic.substr(0, 32) + "' (expected LAYERANAT1)");
  }
  if (!std::getline(in, manifest_line)) throw FormatError(path + ": missing manifest line");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": manifest is not valid JSON: " + e.what());
  }
  const std::streampos blob_start = in.tellg();
  in.seekg(0, std::ios::end);
  const auto blob_size = static_cast<std::size_t>(in.tellg() - blob_start);

  ModelSpec spec = spec_from_json(manifest.at("spec"));
  Model layout = Model::build(spec, manifest.value("seed", std::uint64_t{0}));

  std::unordered_map<std::string, const nlohmann::json*> table;
  for (const auto& c : manifest.at("components")) {
    const auto name = c.at("name").get<std::string>();
    if (!table.emplace(name, &c).second) {
      throw FormatError(path + ": component " + name + " listed twice");
    }
  }
  if (table.size() != layout.tensors().size()) {
    throw FormatError(path + ": manifest lists " + std::to_string(table.size()) +
                      " components, model has " + std::to_string(layout.tensors().size()));
  }
  std::vector<Tensor<float>> tensors;
  for (std::size_t i = 0; i < layout.tensors().size(); ++i) {
    const auto& name = layout.params()[i].name;
    auto it = table.find(name);
    if (it == table.end()) throw FormatError(path + ": component " + name + " missing");
    const auto& entry = *it->second;
    const Shape shape = entry.at("shape").get<Shape>();
    if (shape != layout.tensors()[i].shape()) {
      throw FormatError(path + ": component " + name + " has shape " + shape_str(shape) +
                        ", spec requires " + shape_str(layout.tensors()[i].shape()));
    }
    const auto offset = entry.at("offset").get<std::size_t>();
    const std::size_t bytes = shape_numel(shape) * sizeof(float);
    if (offset + bytes > blob_size) {
      throw FormatError(path + ": blob for component " + name + " truncated (needs bytes [" +
                        std::to_string(offset) + ", " + std::to_string(offset + bytes) +
                        "), file has " + std::to_string(blob_size) + ")");
    }
    Tensor<float> t(shape);
    in.seekg(blob_start + static_cast<std::streamoff>(offset));
    in.read(reinterpret_cast<char*>(t.raw()), static_cast<std::streamsize>(bytes));
    if (!in) throw FormatError(path + ": read failed for component " + name);
    tensors.push_back(std::move(t));
  }
  if (manifest.contains("blob_bytes") && manifest["blob_bytes"].get<std::size_t>() != blob_size) {
    throw FormatError(path + ": blob section is " + std::to_string(blob_size) +
                      " bytes, manifest says " +
                      std::to_string(manifest["blob_bytes"].get<std::size_t>()));
  }
  LoadedCheckpoint out{Model::from_tensors(spec, layout.seed(), std::move(tensors)), {}, false};
  if (manifest.contains("vocab")) {
    out.vocab = Vocabulary::from_tokens(manifest["vocab"].get<std::vector<std::string>>());
    out.has_vocab = true;
  }
  return out;
}

}  // namespace detail

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  try {
    return detail::read_checkpoint(path);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": malformed manifest: " + e.what());
  }
}

}  // namespace layeranat
