// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/model/config.hpp"

#include <stdexcept>
#include <string>

#include "amem/dialog/vocab.hpp"

namespace amem::model {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Att: return "att";
    case Variant::AttH: return "att_h";
    case Variant::Amem: return "amem";
    case Variant::AmemH: return "amem_h";
    case Variant::AmemSeq: return "amem_seq";
    case Variant::AmemHSeq: return "amem_h_seq";
  }
  return "";
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v = {Variant::Att,     Variant::AttH,    Variant::Amem,
                                         Variant::AmemH,   Variant::AmemSeq, Variant::AmemHSeq};
  return v;
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (Variant v : all_variants()) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

ModelConfig ModelConfig::for_variant(Variant v) {
  ModelConfig c;
  c.use_memory = v != Variant::Att && v != Variant::AttH;
  c.use_history = v == Variant::AttH || v == Variant::AmemH || v == Variant::AmemHSeq;
  c.use_seq_preference = v == Variant::AmemSeq || v == Variant::AmemHSeq;
  return c;
}

std::size_t ModelConfig::question_vocab_size() const {
  return question_vocab ? question_vocab : dialog::question_words().size();
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("model config: " + m); };
  if (use_seq_preference && !use_memory) fail("sequential preference requires the attention memory");
  for (std::size_t d : {word_dim, hidden_dim, key_dim, joint_dim, encoding_dim, dpl_candidates,
                        comb_conv_channels, image_side, num_answers}) {
    if (d == 0) fail("dimensions must be positive");
  }
  if (conv_channels.empty()) fail("at least one convolution stage is required");
  for (std::size_t c : conv_channels) {
    if (c == 0) fail("convolution channels must be positive");
  }
  if (grid_side() == 0 || (grid_side() << conv_channels.size()) != image_side) {
    fail("image side " + std::to_string(image_side) + " is not divisible by 2^" +
         std::to_string(conv_channels.size()));
  }
  if (dpl_candidates > (std::size_t{1} << 31)) fail("too many dynamic-parameter candidates");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"use_history", c.use_history},
          {"use_seq_preference", c.use_seq_preference},
          {"use_memory", c.use_memory},
          {"word_dim", c.word_dim},
          {"hidden_dim", c.hidden_dim},
          {"key_dim", c.key_dim},
          {"joint_dim", c.joint_dim},
          {"encoding_dim", c.encoding_dim},
          {"dpl_candidates", c.dpl_candidates},
          {"comb_conv_channels", c.comb_conv_channels},
          {"image_side", c.image_side},
          {"conv_channels", c.conv_channels},
          {"question_vocab", c.question_vocab_size()},
          {"num_answers", c.num_answers}};
}

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig c) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("use_history", c.use_history);
  get("use_seq_preference", c.use_seq_preference);
  get("use_memory", c.use_memory);
  get("word_dim", c.word_dim);
  get("hidden_dim", c.hidden_dim);
  get("key_dim", c.key_dim);
  get("joint_dim", c.joint_dim);
  get("encoding_dim", c.encoding_dim);
  get("dpl_candidates", c.dpl_candidates);
  get("comb_conv_channels", c.comb_conv_channels);
  get("image_side", c.image_side);
  get("conv_channels", c.conv_channels);
  get("question_vocab", c.question_vocab);
  get("num_answers", c.num_answers);
  return c;
}

}  // namespace amem::model
