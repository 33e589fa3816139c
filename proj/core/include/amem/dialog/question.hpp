// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amem/dialog/grid_world.hpp"

namespace amem::dialog {

enum class QuestionKind : std::uint8_t { Count, Attribute };
enum class Scope : std::uint8_t { WholeImage, PreviousTargets };
enum class Relation : std::uint8_t { Left, Right, Above, Below };

std::string_view kind_name(QuestionKind k);
std::string_view scope_name(Scope s);
std::string_view relation_name(Relation r);
std::optional<QuestionKind> parse_kind(std::string_view s);
std::optional<Scope> parse_scope(std::string_view s);
std::optional<Relation> parse_relation(std::string_view s);

// Grid neighbour of `p` in direction `r`, if inside the grid.
std::optional<CellPos> neighbor(CellPos p, Relation r);

struct AttrValue {
  Attribute attr = Attribute::Color;
  std::uint8_t value = 0;
  friend bool operator==(const AttrValue&, const AttrValue&) = default;
};

struct QuestionAST {
  QuestionKind kind = QuestionKind::Count;
  std::vector<AttrValue> predicate;  // conjunction, 0-2 terms
  Scope scope = Scope::WholeImage;
  std::optional<Relation> relation;
  std::optional<Attribute> queried_attribute;  // present iff kind == Attribute
  bool requires_history = false;

  friend bool operator==(const QuestionAST&, const QuestionAST&) = default;
};

// Structural invariants of an AST in isolation (not against a world).
void validate_ast(const QuestionAST& ast);

bool matches(const DigitCell& cell, const std::vector<AttrValue>& predicate);

using TargetSet = std::vector<CellPos>;  // sorted, unique

struct QAItem {
  QuestionAST ast;
  std::vector<std::string> surface;
  std::size_t answer = 0;  // index into answer_words()
  TargetSet targets;
};

inline constexpr std::size_t kDialogLength = 10;

struct Dialog {
  std::uint64_t world_id = 0;
  std::uint64_t seed = 0;
  std::vector<QAItem> items;
};

}  // namespace amem::dialog
