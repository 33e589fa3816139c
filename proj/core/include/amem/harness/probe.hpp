// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "amem/harness/data.hpp"

namespace amem::harness {

struct ProbeOutputs {
  std::vector<float> final_attention;
  std::vector<float> logits;
  std::size_t predicted = 0;
};

struct ProbeResult {
  std::size_t step = 0;
  std::vector<float> tentative;
  std::vector<float> beta;       // empty for ATT
  std::vector<float> retrieved;  // empty for ATT
  ProbeOutputs base;
  std::optional<std::vector<float>> override_map;
  std::optional<ProbeOutputs> overridden;
};

// Replays `d` with ground-truth answers up to `step` (0-based) and reports
// the attention pipeline there. With `override_map`, the step is also re-run
// with that map in place of the retrieved attention.
ProbeResult probe(const model::AmemModel<float>& model, const EncodedDialog& d, std::size_t step,
                  const std::optional<std::vector<float>>& override_map = {});

// One-hot map over the feature grid selecting (row, col).
std::vector<float> one_hot_cell(const model::ModelConfig& config, std::size_t row, std::size_t col);

nlohmann::json to_json(const ProbeResult& r, const EncodedDialog& d);

// Writes `samples` rows of "label,w0,...,w{P-1}": the dynamic-weight
// candidates at `step` for dialogs drawn without replacement (seeded), labelled
// by question kind.
void dump_dynamic_weights(const model::AmemModel<float>& model, std::span<const EncodedDialog> dialogs,
                          std::size_t step, std::size_t samples, std::uint64_t seed,
                          const std::filesystem::path& out);

}  // namespace amem::harness
