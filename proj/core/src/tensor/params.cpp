// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/tensor/params.hpp"

#include <algorithm>
#include <cmath>

namespace amem::tc {

template <typename T>
Tensor<T>& ParamSet<T>::add(std::string name, Tensor<T> tensor) {
  if (contains(name)) throw UsageError("duplicate parameter name '" + name + "'");
  tensor.set_requires_grad(true);
  entries_.push_back({std::move(name), std::move(tensor)});
  return entries_.back().tensor;
}

template <typename T>
bool ParamSet<T>::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const NamedParam<T>& p) { return p.name == name; });
}

template <typename T>
Tensor<T>& ParamSet<T>::at(std::string_view name) {
  for (auto& p : entries_) {
    if (p.name == name) return p.tensor;
  }
  throw UsageError("unknown parameter '" + std::string(name) + "'");
}

template <typename T>
const Tensor<T>& ParamSet<T>::at(std::string_view name) const {
  return const_cast<ParamSet*>(this)->at(name);
}

template <typename T>
std::size_t ParamSet<T>::num_values() const {
  std::size_t n = 0;
  for (const auto& p : entries_) n += p.tensor.size();
  return n;
}

template <typename T>
void ParamSet<T>::zero_grad() {
  for (auto& p : entries_) p.tensor.zero_grad();
}

template <typename T>
ParamSet<T> ParamSet<T>::clone() const {
  ParamSet out;
  for (const auto& p : entries_) out.add(p.name, p.tensor.clone());
  return out;
}

template <typename T>
void xavier_uniform(Tensor<T>& t, std::size_t fan_in, std::size_t fan_out, SplitMix64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  uniform_fill(t, -a, a, rng);
}

template <typename T>
void uniform_fill(Tensor<T>& t, double lo, double hi, SplitMix64& rng) {
  for (T& v : t.data()) v = static_cast<T>(rng.uniform(lo, hi));
}

template class ParamSet<float>;
template class ParamSet<double>;
template void xavier_uniform(Tensor<float>&, std::size_t, std::size_t, SplitMix64&);
template void xavier_uniform(Tensor<double>&, std::size_t, std::size_t, SplitMix64&);
template void uniform_fill(Tensor<float>&, double, double, SplitMix64&);
template void uniform_fill(Tensor<double>&, double, double, SplitMix64&);

}  // namespace amem::tc
