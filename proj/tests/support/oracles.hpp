// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "amem/tensor/tensor.hpp"
#include "amem/util/splitmix.hpp"

namespace amem::testing {

template <typename T>
tc::Tensor<T> random_tensor(tc::Shape shape, SplitMix64& rng, double lo = -1, double hi = 1,
                            bool requires_grad = false) {
  std::vector<T> v(tc::numel(shape));
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return tc::Tensor<T>(std::move(shape), v, requires_grad);
}

inline std::vector<double> naive_matmul(const std::vector<double>& a, const std::vector<double>& b,
                                        std::size_t m, std::size_t k, std::size_t n) {
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) out[i * n + j] += a[i * k + p] * b[p * n + j];
  return out;
}

// 3x3 cross-correlation with zero padding 1, written as six nested loops.
inline std::vector<double> naive_conv(const std::vector<double>& in, const std::vector<double>& ker,
                                      const std::vector<double>& bias, std::size_t cin, std::size_t cout,
                                      std::size_t h, std::size_t w) {
  std::vector<double> out(cout * h * w);
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        double acc = bias[o];
        for (std::size_t c = 0; c < cin; ++c)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const long yy = static_cast<long>(y) + dy, xx = static_cast<long>(x) + dx;
              if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w)) continue;
              acc += in[(c * h + yy) * w + xx] * ker[((o * cin + c) * 3 + (dy + 1)) * 3 + (dx + 1)];
            }
        out[(o * h + y) * w + x] = acc;
      }
  return out;
}

// Central finite difference of `f` with respect to every element of `t`.
template <typename T>
std::vector<double> numeric_grad(tc::Tensor<T>& t, const std::function<double()>& f, double eps = 1e-6) {
  std::vector<double> g(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const T saved = t[i];
    t[i] = saved + static_cast<T>(eps);
    const double up = f();
    t[i] = saved - static_cast<T>(eps);
    const double down = f();
    t[i] = saved;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

inline double rel_error(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

template <typename T>
std::vector<double> to_double(std::span<const T> v) {
  return {v.begin(), v.end()};
}

}  // namespace amem::testing
