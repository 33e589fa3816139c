// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "amem/dialog/grid_world.hpp"
#include "amem/tensor/tensor.hpp"

namespace amem::dialog {

inline constexpr std::size_t kCellPixels = 16;
inline constexpr std::size_t kImageSide = kGridSide * kCellPixels;  // 64
inline constexpr std::size_t kGlyphCols = 5;
inline constexpr std::size_t kGlyphRows = 7;
inline constexpr std::size_t kGlyphScale = 2;

using Rgb = std::array<float, 3>;

const std::array<Rgb, 5>& color_rgb();
const std::array<Rgb, 5>& bgcolor_rgb();

// Row-major 5x7 bitmap rows for `digit`; bit (4 - x) of row y is column x.
const std::array<std::uint8_t, kGlyphRows>& glyph(std::size_t digit);

// Scaled (10x14) glyph mask for `digit` in `style` (0 flat, 1 stroke).
std::vector<std::uint8_t> glyph_mask(std::size_t digit, std::size_t style);

// Channel-first [3 x 64 x 64] pixels in [0, 1].
std::vector<float> render_pixels(const GridWorld& world);

template <typename T>
tc::Tensor<T> render(const GridWorld& world) {
  auto px = render_pixels(world);
  return tc::Tensor<T>({3, kImageSide, kImageSide}, std::vector<T>(px.begin(), px.end()));
}

}  // namespace amem::dialog
