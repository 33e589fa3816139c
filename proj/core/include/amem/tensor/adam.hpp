// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "amem/tensor/params.hpp"

namespace amem::tc {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Added to the gradient as weight_decay * w for every parameter of rank >= 2.
  double weight_decay = 0.0;
};

/// Moment buffers and step counter. A default-constructed state is
/// uninitialized; adam_step() refuses to run on it.
template <typename T>
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
  bool initialized = false;

  static AdamState init(const ParamSet<T>& params, AdamConfig config);
};

// Bias-corrected Adam update using the grads currently held by `params`.
template <typename T>
void adam_step(ParamSet<T>& params, AdamState<T>& state);

extern template struct AdamState<float>;
extern template struct AdamState<double>;

}  // namespace amem::tc
