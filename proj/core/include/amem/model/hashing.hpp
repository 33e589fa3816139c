// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "amem/util/splitmix.hpp"

namespace amem::model {

// Weight sharing for the dynamic parameter layer. Entry (i, j) of the
// predicted matrix reads candidate idx(i, j) with sign(i, j):
//   h = splitmix64((i << 32) ^ j ^ 0x9E3779B97F4A7C15)
//   idx = h mod num_candidates,  sign = bit 62 of h ? +1 : -1
// splitmix64(x) adds the golden gamma to x and applies the standard mixer.
constexpr std::uint64_t dpl_hash(std::uint64_t i, std::uint64_t j) {
  return splitmix64((i << 32) ^ j ^ kGoldenGamma);
}

constexpr std::uint32_t dpl_index(std::uint64_t i, std::uint64_t j, std::uint64_t num_candidates) {
  return static_cast<std::uint32_t>(dpl_hash(i, j) % num_candidates);
}

constexpr std::int8_t dpl_sign(std::uint64_t i, std::uint64_t j) {
  return ((dpl_hash(i, j) >> 62) & 1u) ? std::int8_t{1} : std::int8_t{-1};
}

struct HashTables {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint32_t> index;  // row-major
  std::vector<std::int8_t> sign;

  static HashTables build(std::size_t rows, std::size_t cols, std::size_t num_candidates);
};

inline HashTables HashTables::build(std::size_t rows, std::size_t cols, std::size_t num_candidates) {
  HashTables t;
  t.rows = rows;
  t.cols = cols;
  t.index.reserve(rows * cols);
  t.sign.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      t.index.push_back(dpl_index(i, j, num_candidates));
      t.sign.push_back(dpl_sign(i, j));
    }
  }
  return t;
}

}  // namespace amem::model
