// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/dialog/grid_world.hpp"

#include "amem/util/splitmix.hpp"

namespace amem::dialog {

std::string_view attribute_name(Attribute a) {
  switch (a) {
    case Attribute::Color: return "color";
    case Attribute::BgColor: return "bgcolor";
    case Attribute::Number: return "number";
    case Attribute::Style: return "style";
  }
  return "";
}

std::optional<Attribute> parse_attribute(std::string_view name) {
  for (Attribute a : kAllAttributes) {
    if (attribute_name(a) == name) return a;
  }
  return std::nullopt;
}

std::string_view value_name(Attribute a, std::size_t v) {
  switch (a) {
    case Attribute::Color: return kColorNames.at(v);
    case Attribute::BgColor: return kBgColorNames.at(v);
    case Attribute::Number: return kNumberNames.at(v);
    case Attribute::Style: return kStyleNames.at(v);
  }
  return "";
}

std::optional<std::size_t> parse_value(Attribute a, std::string_view word) {
  for (std::size_t v = 0; v < cardinality(a); ++v) {
    if (value_name(a, v) == word) return v;
  }
  return std::nullopt;
}

std::size_t DigitCell::value(Attribute a) const {
  switch (a) {
    case Attribute::Color: return color;
    case Attribute::BgColor: return bgcolor;
    case Attribute::Number: return number;
    case Attribute::Style: return style;
  }
  return 0;
}

GridWorld generate_world(std::uint64_t seed) {
  GridWorld w;
  w.seed = seed;
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < kNumCells; ++i) {
    DigitCell& c = w.cells[i];
    c.pos = CellPos::from_index(i);
    c.color = static_cast<std::uint8_t>(rng.uniform_index(cardinality(Attribute::Color)));
    c.bgcolor = static_cast<std::uint8_t>(rng.uniform_index(cardinality(Attribute::BgColor)));
    c.number = static_cast<std::uint8_t>(rng.uniform_index(cardinality(Attribute::Number)));
    c.style = static_cast<std::uint8_t>(rng.uniform_index(cardinality(Attribute::Style)));
  }
  return w;
}

}  // namespace amem::dialog
