// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "amem/tensor/tensor.hpp"
#include "amem/util/splitmix.hpp"

namespace amem::tc {

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;
};

/// Ordered, uniquely named collection of trainable tensors.
template <typename T>
class ParamSet {
 public:
  Tensor<T>& add(std::string name, Tensor<T> tensor);

  bool contains(std::string_view name) const;
  Tensor<T>& at(std::string_view name);
  const Tensor<T>& at(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t num_values() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();

  // Deep copy with fresh (empty) gradients.
  ParamSet clone() const;

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (const auto& p : entries_) {
      std::vector<U> values(p.tensor.data().begin(), p.tensor.data().end());
      out.add(p.name, Tensor<U>(p.tensor.shape(), std::move(values), true));
    }
    return out;
  }

 private:
  std::vector<NamedParam<T>> entries_;
};

// Uniform Xavier: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <typename T>
void xavier_uniform(Tensor<T>& t, std::size_t fan_in, std::size_t fan_out, SplitMix64& rng);

template <typename T>
void uniform_fill(Tensor<T>& t, double lo, double hi, SplitMix64& rng);

extern template class ParamSet<float>;
extern template class ParamSet<double>;

}  // namespace amem::tc
