// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/tensor/adam.hpp"

#include <cmath>
#include <string>

namespace amem::tc {

template <typename T>
AdamState<T> AdamState<T>::init(const ParamSet<T>& params, AdamConfig config) {
  AdamState s;
  s.config = config;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.tensor.size(), T(0));
    s.second_moment.emplace_back(p.tensor.size(), T(0));
  }
  s.initialized = true;
  return s;
}

template <typename T>
void adam_step(ParamSet<T>& params, AdamState<T>& state) {
  if (!state.initialized) throw UsageError("adam_step: optimizer state is not initialized");
  if (state.first_moment.size() != params.size()) {
    throw UsageError("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  state.step += 1;
  const auto& cfg = state.config;
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T lr = static_cast<T>(cfg.learning_rate);
  const T eps = static_cast<T>(cfg.epsilon);
  const T wd = static_cast<T>(cfg.weight_decay);
  const T bc1 = static_cast<T>(1.0 - std::pow(cfg.beta1, static_cast<double>(state.step)));
  const T bc2 = static_cast<T>(1.0 - std::pow(cfg.beta2, static_cast<double>(state.step)));

  std::size_t i = 0;
  for (auto& p : params) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    ++i;
    if (m.size() != p.tensor.size()) {
      throw DimensionError("adam_step: moment buffer size mismatch for '" + p.name + "'");
    }
    auto w = p.tensor.data();
    auto g = p.tensor.grad();
    const bool decay = p.tensor.rank() >= 2 && wd != T(0);
    for (std::size_t k = 0; k < w.size(); ++k) {
      const T gk = decay ? g[k] + wd * w[k] : g[k];
      m[k] = b1 * m[k] + (T(1) - b1) * gk;
      v[k] = b2 * v[k] + (T(1) - b2) * gk * gk;
      const T mhat = m[k] / bc1;
      const T vhat = v[k] / bc2;
      w[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(ParamSet<float>&, AdamState<float>&);
template void adam_step(ParamSet<double>&, AdamState<double>&);

}  // namespace amem::tc
