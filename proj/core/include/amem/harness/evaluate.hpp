// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "amem/harness/data.hpp"

namespace amem::harness {

inline constexpr std::size_t kMaxDistance = dialog::kDialogLength;

struct EvalReport {
  double overall_accuracy = 0;
  std::array<double, dialog::kDialogLength> step_accuracy{};
  double loss = 0;  // mean per-dialog loss (sum over the ten steps)
  double theta = 0;
  bool has_theta = false;
  // beta_by_distance[t][d - 1]: mean addressing mass on the entry d steps
  // back at step t; the NULL entry sits at distance t + 1. Empty for ATT.
  std::vector<std::array<double, kMaxDistance>> beta_by_distance;
  std::size_t dialogs = 0;
  std::size_t samples = 0;  // answered questions
};

nlohmann::json to_json(const EvalReport& r);

// Result of one dialog, as consumed by summarize().
struct DialogOutcome {
  std::array<std::size_t, dialog::kDialogLength> predicted{};
  std::array<std::size_t, dialog::kDialogLength> truth{};
  double loss = 0;
  std::vector<std::vector<double>> beta;
};

EvalReport summarize(std::span<const DialogOutcome> outcomes);

struct EvalOptions {
  std::size_t threads = 1;
};

// Ground-truth-history evaluation. Each worker runs on its own parameter
// clone; outcomes are reduced in dataset order, so the report does not depend
// on the thread count.
EvalReport evaluate(const model::AmemModel<float>& model, std::span<const EncodedDialog> dialogs,
                    const EvalOptions& options = {});

// Scores an arbitrary per-dialog predictor with the same aggregation.
using DialogPredictor = std::function<DialogOutcome(std::size_t index, const EncodedDialog&)>;
EvalReport evaluate_with(std::span<const EncodedDialog> dialogs, const DialogPredictor& predictor,
                         std::size_t threads = 1);

// Number of workers allowed by AMEM_THREADS (default 1).
std::size_t threads_from_env();

}  // namespace amem::harness
