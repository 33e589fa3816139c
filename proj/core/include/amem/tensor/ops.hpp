// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "amem/tensor/tensor.hpp"

// Differentiable operations. Every op takes the graph it records into; when
// the graph is not recording, or no input requires grad, only the forward
// value is computed.
namespace amem::tc {

// [m x k] * [k x n] -> [m x n]
template <typename T>
Tensor<T> matmul(Graph<T>& g, const Tensor<T>& a, const Tensor<T>& b);

// W [m x n] * x [n] -> [m]
template <typename T>
Tensor<T> matvec(Graph<T>& g, const Tensor<T>& w, const Tensor<T>& x);

// W^T [n x m] * x [m] -> [n]
template <typename T>
Tensor<T> matvec_t(Graph<T>& g, const Tensor<T>& w, const Tensor<T>& x);

// W x + b
template <typename T>
Tensor<T> linear(Graph<T>& g, const Tensor<T>& w, const Tensor<T>& x, const Tensor<T>& b);

template <typename T>
Tensor<T> add(Graph<T>& g, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(Graph<T>& g, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(Graph<T>& g, const Tensor<T>& a, T factor);

// a + s * d, where s is a learnable scalar tensor and d a constant vector.
template <typename T>
Tensor<T> add_scaled(Graph<T>& g, const Tensor<T>& a, const Tensor<T>& s, std::span<const T> d);

template <typename T>
Tensor<T> tanh(Graph<T>& g, const Tensor<T>& x);

template <typename T>
Tensor<T> sigmoid(Graph<T>& g, const Tensor<T>& x);

template <typename T>
Tensor<T> relu(Graph<T>& g, const Tensor<T>& x);

// Concatenation of flattened inputs into a vector.
template <typename T>
Tensor<T> concat(Graph<T>& g, const std::vector<Tensor<T>>& parts);

// Stacks equal-length vectors as rows of an [n x d] matrix.
template <typename T>
Tensor<T> stack(Graph<T>& g, const std::vector<Tensor<T>>& rows);

template <typename T>
Tensor<T> reshape(Graph<T>& g, const Tensor<T>& x, Shape shape);

template <typename T>
Tensor<T> sum(Graph<T>& g, const Tensor<T>& x);

// Row `index` of an embedding table [V x D] -> [D].
template <typename T>
Tensor<T> embedding(Graph<T>& g, const Tensor<T>& table, std::size_t index);

// Numerically stabilized softmax over a vector.
template <typename T>
Tensor<T> softmax(Graph<T>& g, const Tensor<T>& logits);

// -log softmax(logits)[target], as a scalar.
template <typename T>
Tensor<T> cross_entropy(Graph<T>& g, const Tensor<T>& logits, std::size_t target);

// 3x3 cross-correlation, stride 1, zero padding 1.
// input [C_in x H x W], kernels [C_out x C_in x 3 x 3], bias [C_out].
template <typename T>
Tensor<T> conv2d(Graph<T>& g, const Tensor<T>& input, const Tensor<T>& kernels,
                 const Tensor<T>& bias);

// Non-overlapping 2x2 max pooling. Ties route gradient to the first cell in
// row-major order.
template <typename T>
Tensor<T> maxpool2x2(Graph<T>& g, const Tensor<T>& input);

// One LSTM update. Weight layout: w [4H x (D + H)] acting on [x; h], bias [4H],
// gate blocks ordered input, forget, candidate, output.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> lstm_step(Graph<T>& g, const Tensor<T>& x, const Tensor<T>& h,
                                          const Tensor<T>& c, const Tensor<T>& w,
                                          const Tensor<T>& b);

// Matrix [rows x cols] whose entry (i, j) is sign[i*cols+j] * pool[index[i*cols+j]].
template <typename T>
Tensor<T> hashed_weights(Graph<T>& g, const Tensor<T>& pool, std::span<const std::uint32_t> index,
                         std::span<const std::int8_t> sign, std::size_t rows, std::size_t cols);

}  // namespace amem::tc
