// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amem/harness/data.hpp"

namespace amem::harness {

struct GradcheckConfig {
  std::uint64_t seed = 7;
  std::size_t samples_per_group = 6;  // elements probed per parameter tensor
  // Step of the fourth-order central difference. The loss is a sum of ten
  // cross entropies (~36), so much smaller steps drown small gradients in
  // rounding error.
  double epsilon = 1e-3;
  double tolerance = 1e-5;
  // Elements whose estimates at epsilon and epsilon/4 differ by more than
  // this (relative) sit next to a kink and are replaced by another element.
  double smoothness = 1e-6;
  // Denominator floor: |a - n| / max(|a|, |n|, floor). Below it the check is
  // effectively absolute, which keeps gradients that are zero up to rounding
  // from reporting huge relative errors.
  double floor = 1e-6;
  // Test hook: runs after backward and before comparison, e.g. to corrupt grads.
  std::function<void(tc::ParamSet<double>&)> after_backward;
};

struct GroupResult {
  std::string name;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // elements next to a ReLU / max-pool kink
  double max_rel_error = 0;
  double max_abs_grad = 0;
};

struct GradcheckReport {
  std::vector<GroupResult> groups;
  double max_rel_error = 0;
  double tolerance = 0;
  bool passed = false;
  std::vector<std::string> failing;
};

nlohmann::json to_json(const GradcheckReport& r);

// The tiny double-precision model used for gradient checks: every component
// enabled, 32 px image, 2x2 feature grid.
model::ModelConfig tiny_model_config();

// A dialog for the tiny model: real generated questions and answers over a
// random image.
EncodedDialog tiny_dialog(std::uint64_t seed);

// Random parameters, including the NULL key and theta, scaled so that no
// component saturates.
tc::ParamSet<double> tiny_params(const model::ModelConfig& config, std::uint64_t seed);

// End-to-end finite-difference check of the summed dialog loss.
GradcheckReport gradcheck(const GradcheckConfig& config = {});

}  // namespace amem::harness
