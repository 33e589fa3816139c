// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/harness/data.hpp"

#include <fstream>
#include <map>
#include <string>

#include "amem/dialog/render.hpp"
#include "amem/dialog/vocab.hpp"
#include "amem/tensor/ops.hpp"

namespace amem::harness {

std::vector<EncodedDialog> encode_records(std::span<const dialog::DialogRecord> records) {
  std::map<std::uint64_t, std::shared_ptr<const std::vector<float>>> images;
  std::vector<EncodedDialog> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.dialog.items.size() != dialog::kDialogLength) {
      throw ConfigurationError("dialog of world " + std::to_string(r.world_id) + " does not have 10 items");
    }
    EncodedDialog e;
    e.world_id = r.world_id;
    auto& img = images[r.image_seed];
    if (!img) img = std::make_shared<const std::vector<float>>(dialog::render_pixels(r.world));
    e.image = img;
    e.image_side = dialog::kImageSide;
    for (std::size_t s = 0; s < dialog::kDialogLength; ++s) {
      const auto& item = r.dialog.items[s];
      for (const auto& w : item.surface) e.questions[s].push_back(dialog::question_index_or_throw(w));
      e.answers[s] = item.answer;
      e.kinds[s] = item.ast.kind;
    }
    out.push_back(std::move(e));
  }
  return out;
}

void check_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream is(path);
  if (!is) throw ConfigurationError("missing manifest '" + path.string() + "'");
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("unreadable manifest '" + path.string() + "': " + e.what());
  }
  auto same = [&](const char* key, std::span<const std::string_view> words) {
    if (!m.contains(key)) return;
    const auto& v = m.at(key);
    bool ok = v.is_array() && v.size() == words.size();
    for (std::size_t i = 0; ok && i < words.size(); ++i) ok = v[i].is_string() && v[i].get<std::string>() == words[i];
    if (!ok) throw ConfigurationError(std::string("dataset '") + key + "' does not match the model vocabulary");
  };
  if (!m.contains("vocab")) throw ConfigurationError("manifest has no answer vocabulary");
  same("vocab", dialog::answer_words());
  same("question_vocab", dialog::question_words());
}

std::vector<dialog::DialogRecord> load_split(const std::filesystem::path& dir, dialog::Split split) {
  return dialog::load_jsonl(dir / (std::string(dialog::split_name(split)) + ".jsonl"));
}

DatasetSplits load_dataset_dir(const std::filesystem::path& dir) {
  check_manifest(dir);
  return {load_split(dir, dialog::Split::Train), load_split(dir, dialog::Split::Val),
          load_split(dir, dialog::Split::Test)};
}

void check_compatible(const model::ModelConfig& config, std::span<const EncodedDialog> dialogs) {
  if (config.num_answers != dialog::kNumAnswers) {
    throw ConfigurationError("model predicts " + std::to_string(config.num_answers) + " answers, dataset has " +
                             std::to_string(dialog::kNumAnswers));
  }
  const std::size_t vocab = config.question_vocab_size();
  for (const auto& d : dialogs) {
    if (d.image_side != config.image_side) {
      throw ConfigurationError("dataset images are " + std::to_string(d.image_side) + " px, model expects " +
                               std::to_string(config.image_side));
    }
    for (const auto& q : d.questions) {
      for (auto t : q) {
        if (t >= vocab) throw ConfigurationError("question token id " + std::to_string(t) + " outside model vocabulary");
      }
    }
  }
}

template <typename T>
DialogPass<T> run_dialog(const model::AmemModel<T>& m, tc::Graph<T>& g, const EncodedDialog& d,
                         bool collect_beta) {
  DialogPass<T> out;
  const auto features = m.extract_features(g, image_tensor<T>(d));
  auto state = m.begin_dialog();
  for (std::size_t s = 0; s < dialog::kDialogLength; ++s) {
    const auto step = m.dialog_step(g, state, features, d.questions[s], d.answers[s]);
    const auto& logits = step.outcome.logits;
    const auto ce = tc::cross_entropy(g, logits, d.answers[s]);
    out.loss = s == 0 ? ce : tc::add(g, out.loss, ce);
    out.step_loss[s] = static_cast<double>(ce.item());
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k) {
      if (logits[k] > logits[best]) best = k;
    }
    out.predicted[s] = best;
    if (collect_beta && step.context.beta.defined()) {
      const auto b = step.context.beta.data();
      out.beta.emplace_back(b.begin(), b.end());
    }
  }
  return out;
}

template DialogPass<float> run_dialog(const model::AmemModel<float>&, tc::Graph<float>&, const EncodedDialog&, bool);
template DialogPass<double> run_dialog(const model::AmemModel<double>&, tc::Graph<double>&, const EncodedDialog&,
                                       bool);

}  // namespace amem::harness
