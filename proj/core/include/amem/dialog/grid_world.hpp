// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace amem::dialog {

inline constexpr std::size_t kGridSide = 4;
inline constexpr std::size_t kNumCells = kGridSide * kGridSide;

enum class Attribute : std::uint8_t { Color = 0, BgColor = 1, Number = 2, Style = 3 };
inline constexpr std::array<Attribute, 4> kAllAttributes = {Attribute::Color, Attribute::BgColor,
                                                            Attribute::Number, Attribute::Style};

// Number of values each attribute ranges over.
constexpr std::size_t cardinality(Attribute a) {
  switch (a) {
    case Attribute::Color: return 5;
    case Attribute::BgColor: return 5;
    case Attribute::Number: return 10;
    case Attribute::Style: return 2;
  }
  return 0;
}

inline constexpr std::array<std::string_view, 5> kColorNames = {"red", "blue", "green", "purple", "brown"};
inline constexpr std::array<std::string_view, 5> kBgColorNames = {"cyan", "yellow", "white", "silver",
                                                                  "salmon"};
inline constexpr std::array<std::string_view, 10> kNumberNames = {"0", "1", "2", "3", "4",
                                                                  "5", "6", "7", "8", "9"};
inline constexpr std::array<std::string_view, 2> kStyleNames = {"flat", "stroke"};

std::string_view attribute_name(Attribute a);  // "color", "bgcolor", "number", "style"
std::optional<Attribute> parse_attribute(std::string_view name);

// Word for value `v` of attribute `a` ("red", "salmon", "7", "stroke").
std::string_view value_name(Attribute a, std::size_t v);
std::optional<std::size_t> parse_value(Attribute a, std::string_view word);

struct CellPos {
  std::uint8_t row = 0;
  std::uint8_t col = 0;

  constexpr std::size_t index() const { return row * kGridSide + col; }
  static constexpr CellPos from_index(std::size_t i) {
    return {static_cast<std::uint8_t>(i / kGridSide), static_cast<std::uint8_t>(i % kGridSide)};
  }
  friend constexpr bool operator==(CellPos, CellPos) = default;
  friend constexpr auto operator<=>(CellPos a, CellPos b) { return a.index() <=> b.index(); }
};

struct DigitCell {
  CellPos pos;
  std::uint8_t color = 0;
  std::uint8_t bgcolor = 0;
  std::uint8_t number = 0;
  std::uint8_t style = 0;

  std::size_t value(Attribute a) const;
  friend bool operator==(const DigitCell&, const DigitCell&) = default;
};

struct GridWorld {
  std::array<DigitCell, kNumCells> cells{};  // row-major
  std::uint64_t seed = 0;

  const DigitCell& at(CellPos p) const { return cells[p.index()]; }
  friend bool operator==(const GridWorld&, const GridWorld&) = default;
};

// 16 cells with independently uniform attributes drawn, in row-major order and
// attribute order color, bgcolor, number, style, from a splitmix64 stream.
GridWorld generate_world(std::uint64_t seed);

}  // namespace amem::dialog
