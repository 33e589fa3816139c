// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/dialog/question.hpp"

#include <stdexcept>

namespace amem::dialog {

std::string_view kind_name(QuestionKind k) {
  return k == QuestionKind::Count ? "count" : "attribute";
}

std::string_view scope_name(Scope s) {
  return s == Scope::WholeImage ? "whole_image" : "previous_targets";
}

std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::Left: return "left";
    case Relation::Right: return "right";
    case Relation::Above: return "above";
    case Relation::Below: return "below";
  }
  return "";
}

std::optional<QuestionKind> parse_kind(std::string_view s) {
  if (s == "count") return QuestionKind::Count;
  if (s == "attribute") return QuestionKind::Attribute;
  return std::nullopt;
}

std::optional<Scope> parse_scope(std::string_view s) {
  if (s == "whole_image") return Scope::WholeImage;
  if (s == "previous_targets") return Scope::PreviousTargets;
  return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view s) {
  for (Relation r : {Relation::Left, Relation::Right, Relation::Above, Relation::Below}) {
    if (relation_name(r) == s) return r;
  }
  return std::nullopt;
}

std::optional<CellPos> neighbor(CellPos p, Relation r) {
  int row = p.row, col = p.col;
  switch (r) {
    case Relation::Left: --col; break;
    case Relation::Right: ++col; break;
    case Relation::Above: --row; break;
    case Relation::Below: ++row; break;
  }
  constexpr int side = static_cast<int>(kGridSide);
  if (row < 0 || col < 0 || row >= side || col >= side) return std::nullopt;
  return CellPos{static_cast<std::uint8_t>(row), static_cast<std::uint8_t>(col)};
}

void validate_ast(const QuestionAST& ast) {
  if ((ast.kind == QuestionKind::Attribute) != ast.queried_attribute.has_value()) {
    throw std::invalid_argument("queried_attribute must be present exactly for attribute questions");
  }
  if (ast.relation && ast.scope != Scope::PreviousTargets) {
    throw std::invalid_argument("a spatial relation requires previous-target scope");
  }
  const bool needs_history = ast.scope == Scope::PreviousTargets || ast.relation.has_value();
  if (ast.requires_history != needs_history) {
    throw std::invalid_argument("requires_history disagrees with scope/relation");
  }
  if (ast.predicate.size() > 2) throw std::invalid_argument("predicate has more than two terms");
  for (std::size_t i = 0; i < ast.predicate.size(); ++i) {
    const auto& term = ast.predicate[i];
    if (term.value >= cardinality(term.attr)) throw std::invalid_argument("predicate value out of range");
    for (std::size_t j = 0; j < i; ++j) {
      if (ast.predicate[j].attr == term.attr) throw std::invalid_argument("repeated predicate attribute");
    }
  }
}

bool matches(const DigitCell& cell, const std::vector<AttrValue>& predicate) {
  for (const auto& term : predicate) {
    if (cell.value(term.attr) != term.value) return false;
  }
  return true;
}

}  // namespace amem::dialog
