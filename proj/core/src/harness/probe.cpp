// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/harness/probe.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "amem/dialog/vocab.hpp"
#include "amem/util/splitmix.hpp"

namespace amem::harness {
namespace {

std::vector<float> to_vec(const tc::Tensor<float>& t) {
  if (!t.defined()) return {};
  return {t.data().begin(), t.data().end()};
}

std::size_t argmax(const tc::Tensor<float>& t) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (t[k] > t[best]) best = k;
  }
  return best;
}

ProbeOutputs outputs_of(const model::StepOutcome<float>& o) {
  return {to_vec(o.final_attention), to_vec(o.logits), argmax(o.logits)};
}

void check_step(std::size_t step) {
  if (step >= dialog::kDialogLength) {
    throw tc::UsageError("step " + std::to_string(step) + " outside [0, " + std::to_string(dialog::kDialogLength) + ")");
  }
}

// Runs steps [0, step) with ground-truth answers and prepares `step`.
model::StepContext<float> replay(const model::AmemModel<float>& m, tc::Graph<float>& g,
                                 const model::FeatureGrid<float>& features, model::DialogState<float>& state,
                                 const EncodedDialog& d, std::size_t step) {
  for (std::size_t s = 0; s < step; ++s) m.dialog_step(g, state, features, d.questions[s], d.answers[s]);
  return m.prepare_step(g, state, features, d.questions[step]);
}

nlohmann::json outputs_json(const ProbeOutputs& o) {
  return {{"final_attention", o.final_attention},
          {"logits", o.logits},
          {"predicted_index", o.predicted},
          {"predicted_answer", dialog::answer_word(o.predicted)}};
}

}  // namespace

ProbeResult probe(const model::AmemModel<float>& m, const EncodedDialog& d, std::size_t step,
                  const std::optional<std::vector<float>>& override_map) {
  check_step(step);
  check_compatible(m.config(), std::span<const EncodedDialog>(&d, 1));
  if (override_map && !m.config().use_memory) {
    throw tc::UsageError("the ATT variant has no retrieved attention to override");
  }
  tc::Graph<float> g(/*recording=*/false);
  const auto features = m.extract_features(g, image_tensor<float>(d));
  auto state = m.begin_dialog();
  const auto ctx = replay(m, g, features, state, d, step);

  ProbeResult r;
  r.step = step;
  r.tentative = to_vec(ctx.tentative);
  r.beta = to_vec(ctx.beta);
  r.retrieved = to_vec(ctx.retrieved);
  r.base = outputs_of(m.finish_step(g, ctx, features));
  if (override_map) {
    r.override_map = *override_map;
    const tc::Tensor<float> replacement({override_map->size()}, *override_map);
    r.overridden = outputs_of(m.override_retrieval(g, ctx, features, replacement));
  }
  return r;
}

std::vector<float> one_hot_cell(const model::ModelConfig& config, std::size_t row, std::size_t col) {
  const std::size_t side = config.grid_side();
  if (row >= side || col >= side) {
    throw tc::UsageError("cell (" + std::to_string(row) + "," + std::to_string(col) + ") outside the " +
                         std::to_string(side) + "x" + std::to_string(side) + " grid");
  }
  std::vector<float> v(config.num_cells(), 0.0f);
  v[row * side + col] = 1.0f;
  return v;
}

nlohmann::json to_json(const ProbeResult& r, const EncodedDialog& d) {
  auto maybe = [](const std::vector<float>& v) { return v.empty() ? nlohmann::json(nullptr) : nlohmann::json(v); };
  std::vector<std::string> words;
  for (auto t : d.questions[r.step]) words.emplace_back(dialog::question_words()[t]);
  nlohmann::json j = {{"step", r.step},
                      {"question", words},
                      {"ground_truth", dialog::answer_word(d.answers[r.step])},
                      {"tentative_attention", r.tentative},
                      {"beta", maybe(r.beta)},
                      {"retrieved_attention", maybe(r.retrieved)},
                      {"final_attention", r.base.final_attention},
                      {"predicted_answer", dialog::answer_word(r.base.predicted)},
                      {"predicted_index", r.base.predicted},
                      {"logits", r.base.logits}};
  if (r.overridden) {
    j["override"] = outputs_json(*r.overridden);
    j["override"]["retrieved_attention"] = *r.override_map;
  }
  return j;
}

void dump_dynamic_weights(const model::AmemModel<float>& m, std::span<const EncodedDialog> dialogs,
                          std::size_t step, std::size_t samples, std::uint64_t seed,
                          const std::filesystem::path& out) {
  check_step(step);
  if (!m.config().use_memory) throw tc::UsageError("the ATT variant has no dynamic parameter layer");
  if (samples == 0) throw tc::UsageError("sample count must be positive");
  if (samples > dialogs.size()) {
    throw tc::UsageError("requested " + std::to_string(samples) + " samples from " + std::to_string(dialogs.size()) +
                         " dialogs");
  }
  check_compatible(m.config(), dialogs);
  std::vector<std::size_t> order(dialogs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 rng(seed ^ fnv1a64("dump-weights"));
  for (std::size_t i = 0; i < samples; ++i) std::swap(order[i], order[i + rng.uniform_index(order.size() - i)]);

  std::ofstream os(out, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + out.string() + "' for writing");
  os << "label";
  for (std::size_t k = 0; k < m.config().dpl_candidates; ++k) os << ",w" << k;
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < samples; ++i) {
    const auto& d = dialogs[order[i]];
    tc::Graph<float> g(/*recording=*/false);
    const auto features = m.extract_features(g, image_tensor<float>(d));
    auto state = m.begin_dialog();
    const auto ctx = replay(m, g, features, state, d, step);
    const auto cand = m.dynamic_candidates(g, ctx.context);
    os << (d.kinds[step] == dialog::QuestionKind::Count ? "Count" : "Attribute");
    for (float v : cand.data()) {
      std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(v));
      os << buf;
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("failed writing '" + out.string() + "'");
}

}  // namespace amem::harness
