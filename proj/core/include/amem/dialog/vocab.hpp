// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "amem/dialog/grid_world.hpp"

namespace amem::dialog {

class VocabularyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kNumAnswers = 38;
inline constexpr std::size_t kMaxCount = 15;

// Answer words: 5 colors, 5 background colors, digits "0".."9", 2 styles, and
// count words "zero".."fifteen", in that order.
std::span<const std::string_view> answer_words();
std::string_view answer_word(std::size_t index);
std::optional<std::size_t> answer_index(std::string_view word);

std::size_t attribute_answer(Attribute a, std::size_t value);
std::size_t count_answer(std::size_t count);  // throws for count > 15

// Closed question vocabulary produced by realize_surface().
std::span<const std::string_view> question_words();
std::optional<std::size_t> question_index(std::string_view word);
std::size_t question_index_or_throw(std::string_view word);

}  // namespace amem::dialog
