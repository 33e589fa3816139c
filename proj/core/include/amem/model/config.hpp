// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace amem::model {

// The six attention models compared in the ablation grid.
enum class Variant { Att, AttH, Amem, AmemH, AmemSeq, AmemHSeq };

std::string_view variant_name(Variant v);  // "att", "att_h", "amem", ...
std::optional<Variant> parse_variant(std::string_view name);
const std::vector<Variant>& all_variants();

struct ModelConfig {
  bool use_history = false;         // +H
  bool use_seq_preference = false;  // +SEQ
  bool use_memory = true;           // false: ATT baseline

  std::size_t word_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t key_dim = 64;
  std::size_t joint_dim = 64;  // tentative-attention embedding space
  std::size_t encoding_dim = 128;
  std::size_t dpl_candidates = 512;
  std::size_t comb_conv_channels = 8;
  std::size_t image_side = 64;
  std::vector<std::size_t> conv_channels = {32, 32, 64, 64};
  std::size_t question_vocab = 0;  // 0: the generator's closed vocabulary
  std::size_t num_answers = 38;

  static ModelConfig for_variant(Variant v);

  std::size_t feat_channels() const { return conv_channels.back(); }
  std::size_t grid_side() const { return image_side >> conv_channels.size(); }
  std::size_t num_cells() const { return grid_side() * grid_side(); }
  std::size_t question_vocab_size() const;

  // Throws std::invalid_argument on inconsistent flags or dimensions.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});

}  // namespace amem::model
