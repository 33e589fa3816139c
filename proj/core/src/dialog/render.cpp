// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/dialog/render.hpp"

#include <stdexcept>

namespace amem::dialog {
namespace {

// Bold 5x7 digit font; most strokes are two columns wide so the scaled
// glyph has interior pixels for the outline style.
constexpr std::array<std::array<std::uint8_t, kGlyphRows>, 10> kFont = {{
    {0b01110, 0b11011, 0b11011, 0b11011, 0b11011, 0b11011, 0b01110},  // 0
    {0b00110, 0b01110, 0b00110, 0b00110, 0b00110, 0b00110, 0b01111},  // 1
    {0b01110, 0b11011, 0b00011, 0b00110, 0b01100, 0b11000, 0b11111},  // 2
    {0b11110, 0b00011, 0b00011, 0b01110, 0b00011, 0b00011, 0b11110},  // 3
    {0b00011, 0b00111, 0b01011, 0b11011, 0b11111, 0b00011, 0b00011},  // 4
    {0b11111, 0b11000, 0b11110, 0b00011, 0b00011, 0b11011, 0b01110},  // 5
    {0b01110, 0b11000, 0b11000, 0b11110, 0b11011, 0b11011, 0b01110},  // 6
    {0b11111, 0b00011, 0b00110, 0b00110, 0b01100, 0b01100, 0b01100},  // 7
    {0b01110, 0b11011, 0b11011, 0b01110, 0b11011, 0b11011, 0b01110},  // 8
    {0b01110, 0b11011, 0b11011, 0b01111, 0b00011, 0b00011, 0b01110},  // 9
}};

constexpr std::array<Rgb, 5> kColorRgb = {{
    {0.90f, 0.10f, 0.10f},  // red
    {0.10f, 0.20f, 0.90f},  // blue
    {0.10f, 0.65f, 0.15f},  // green
    {0.55f, 0.15f, 0.75f},  // purple
    {0.50f, 0.30f, 0.10f},  // brown
}};

constexpr std::array<Rgb, 5> kBgColorRgb = {{
    {0.55f, 1.00f, 1.00f},  // cyan
    {1.00f, 1.00f, 0.45f},  // yellow
    {1.00f, 1.00f, 1.00f},  // white
    {0.75f, 0.75f, 0.75f},  // silver
    {0.98f, 0.55f, 0.48f},  // salmon
}};

constexpr std::size_t kMaskCols = kGlyphCols * kGlyphScale;  // 10
constexpr std::size_t kMaskRows = kGlyphRows * kGlyphScale;  // 14
constexpr std::size_t kOffsetX = (kCellPixels - kMaskCols) / 2;
constexpr std::size_t kOffsetY = (kCellPixels - kMaskRows) / 2;

}  // namespace

const std::array<Rgb, 5>& color_rgb() { return kColorRgb; }
const std::array<Rgb, 5>& bgcolor_rgb() { return kBgColorRgb; }

const std::array<std::uint8_t, kGlyphRows>& glyph(std::size_t digit) {
  if (digit > 9) throw std::out_of_range("glyph: digit out of range");
  return kFont[digit];
}

std::vector<std::uint8_t> glyph_mask(std::size_t digit, std::size_t style) {
  const auto& rows = glyph(digit);
  std::vector<std::uint8_t> solid(kMaskRows * kMaskCols, 0);
  for (std::size_t y = 0; y < kMaskRows; ++y) {
    for (std::size_t x = 0; x < kMaskCols; ++x) {
      const std::size_t fy = y / kGlyphScale, fx = x / kGlyphScale;
      solid[y * kMaskCols + x] = (rows[fy] >> (kGlyphCols - 1 - fx)) & 1u;
    }
  }
  if (style == 0) return solid;

  // Outline: drop pixels whose 8 neighbours are all set.
  auto at = [&](std::ptrdiff_t y, std::ptrdiff_t x) -> std::uint8_t {
    if (y < 0 || x < 0 || y >= static_cast<std::ptrdiff_t>(kMaskRows) ||
        x >= static_cast<std::ptrdiff_t>(kMaskCols)) {
      return 0;
    }
    return solid[static_cast<std::size_t>(y) * kMaskCols + static_cast<std::size_t>(x)];
  };
  std::vector<std::uint8_t> outline(solid);
  for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(kMaskRows); ++y) {
    for (std::ptrdiff_t x = 0; x < static_cast<std::ptrdiff_t>(kMaskCols); ++x) {
      if (!at(y, x)) continue;
      bool interior = true;
      for (std::ptrdiff_t dy = -1; dy <= 1 && interior; ++dy) {
        for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
          if (!at(y + dy, x + dx)) {
            interior = false;
            break;
          }
        }
      }
      if (interior) outline[static_cast<std::size_t>(y) * kMaskCols + static_cast<std::size_t>(x)] = 0;
    }
  }
  return outline;
}

std::vector<float> render_pixels(const GridWorld& world) {
  constexpr std::size_t plane = kImageSide * kImageSide;
  std::vector<float> px(3 * plane);
  for (const DigitCell& cell : world.cells) {
    const Rgb& bg = kBgColorRgb.at(cell.bgcolor);
    const Rgb& fg = kColorRgb.at(cell.color);
    const auto mask = glyph_mask(cell.number, cell.style);
    const std::size_t oy = cell.pos.row * kCellPixels, ox = cell.pos.col * kCellPixels;
    for (std::size_t y = 0; y < kCellPixels; ++y) {
      for (std::size_t x = 0; x < kCellPixels; ++x) {
        bool on = false;
        if (y >= kOffsetY && y < kOffsetY + kMaskRows && x >= kOffsetX && x < kOffsetX + kMaskCols) {
          on = mask[(y - kOffsetY) * kMaskCols + (x - kOffsetX)] != 0;
        }
        const Rgb& rgb = on ? fg : bg;
        for (std::size_t ch = 0; ch < 3; ++ch) {
          px[ch * plane + (oy + y) * kImageSide + ox + x] = rgb[ch];
        }
      }
    }
  }
  return px;
}

}  // namespace amem::dialog
