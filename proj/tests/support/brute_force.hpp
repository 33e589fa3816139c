// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "amem/dialog/grid_world.hpp"
#include "amem/dialog/question.hpp"

namespace amem::testing {

using dialog::Attribute;
using dialog::CellPos;
using dialog::DigitCell;
using dialog::GridWorld;
using dialog::QuestionAST;
using dialog::QuestionKind;
using dialog::Relation;
using dialog::Scope;
using dialog::TargetSet;

// Independent re-evaluation of a question: enumerate all 16 cells and apply
// scope, relation and predicate directly from the AST.
inline std::string brute_force_answer(const GridWorld& w, const TargetSet& prior, const QuestionAST& ast) {
  static const char* kCountWords[] = {"zero", "one", "two",    "three",    "four",    "five",
                                      "six",  "seven", "eight", "nine",   "ten",      "eleven",
                                      "twelve", "thirteen", "fourteen", "fifteen"};
  std::vector<const DigitCell*> scope;
  for (const auto& cell : w.cells) {
    bool in_scope = ast.scope == Scope::WholeImage;
    for (CellPos p : prior) in_scope |= (p == cell.pos);
    if (ast.relation) {
      const auto& anchor = prior.at(0);
      int dr = 0, dc = 0;
      switch (*ast.relation) {
        case Relation::Left: dc = -1; break;
        case Relation::Right: dc = 1; break;
        case Relation::Above: dr = -1; break;
        case Relation::Below: dr = 1; break;
      }
      in_scope = cell.pos.row == anchor.row + dr && cell.pos.col == anchor.col + dc;
    }
    if (!in_scope) continue;
    bool ok = true;
    for (const auto& t : ast.predicate) {
      const int v = t.attr == Attribute::Color     ? cell.color
                    : t.attr == Attribute::BgColor ? cell.bgcolor
                    : t.attr == Attribute::Number  ? cell.number
                                                   : cell.style;
      ok &= v == t.value;
    }
    if (ok) scope.push_back(&cell);
  }
  if (ast.kind == QuestionKind::Count) return scope.size() < 16 ? kCountWords[scope.size()] : "<out of range>";
  if (scope.size() != 1) return "<ambiguous>";
  const DigitCell& c = *scope.at(0);
  switch (*ast.queried_attribute) {
    case Attribute::Color: return std::string(dialog::kColorNames[c.color]);
    case Attribute::BgColor: return std::string(dialog::kBgColorNames[c.bgcolor]);
    case Attribute::Number: return std::to_string(c.number);
    case Attribute::Style: return std::string(dialog::kStyleNames[c.style]);
  }
  return "";
}

}  // namespace amem::testing
