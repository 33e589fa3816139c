// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/dialog/vocab.hpp"

#include <string>

namespace amem::dialog {
namespace {

constexpr std::array<std::string_view, kNumAnswers> kAnswers = {
    "red",   "blue",   "green", "purple", "brown",  "cyan",   "yellow",   "white",
    "silver", "salmon", "0",    "1",      "2",      "3",      "4",        "5",
    "6",     "7",      "8",     "9",      "flat",   "stroke", "zero",     "one",
    "two",   "three",  "four",  "five",   "six",    "seven",  "eight",    "nine",
    "ten",   "eleven", "twelve", "thirteen", "fourteen", "fifteen"};

constexpr std::size_t kCountOffset = 22;

constexpr std::array<std::string_view, 49> kQuestionWords = {
    // template words
    "how", "many", "are", "there", "in", "the", "image", "?", "among", "them", "what", "is", "of",
    "digit", "digits", "s", "with", "background", "at", "it", "color", "number", "style",
    // directions
    "left", "right", "top", "bottom",
    // attribute values
    "red", "blue", "green", "purple", "brown", "cyan", "yellow", "white", "silver", "salmon", "0",
    "1", "2", "3", "4", "5", "6", "7", "8", "9", "flat", "stroke"};

}  // namespace

std::span<const std::string_view> answer_words() { return kAnswers; }

std::string_view answer_word(std::size_t index) {
  if (index >= kAnswers.size()) throw VocabularyError("answer index " + std::to_string(index) + " out of range");
  return kAnswers[index];
}

std::optional<std::size_t> answer_index(std::string_view word) {
  for (std::size_t i = 0; i < kAnswers.size(); ++i) {
    if (kAnswers[i] == word) return i;
  }
  return std::nullopt;
}

std::size_t attribute_answer(Attribute a, std::size_t value) {
  if (value >= cardinality(a)) throw VocabularyError("attribute value out of range");
  switch (a) {
    case Attribute::Color: return value;
    case Attribute::BgColor: return 5 + value;
    case Attribute::Number: return 10 + value;
    case Attribute::Style: return 20 + value;
  }
  return 0;
}

std::size_t count_answer(std::size_t count) {
  if (count > kMaxCount) {
    throw VocabularyError("count " + std::to_string(count) + " has no answer word");
  }
  return kCountOffset + count;
}

std::span<const std::string_view> question_words() {
  return kQuestionWords;
}

std::optional<std::size_t> question_index(std::string_view word) {
  const auto words = question_words();
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] == word) return i;
  }
  return std::nullopt;
}

std::size_t question_index_or_throw(std::string_view word) {
  if (auto i = question_index(word)) return *i;
  throw VocabularyError("unknown question token '" + std::string(word) + "'");
}

}  // namespace amem::dialog
