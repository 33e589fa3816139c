// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/dialog/oracle.hpp"

#include <string>

#include "amem/dialog/vocab.hpp"

namespace amem::dialog {

Resolution resolve(const GridWorld& world, const TargetSet& prior_targets, const QuestionAST& ast) {
  validate_ast(ast);

  TargetSet candidates;
  if (ast.relation) {
    if (prior_targets.size() != 1) {
      throw ResolutionError("spatial relation needs exactly one previous target, have " +
                            std::to_string(prior_targets.size()));
    }
    auto n = neighbor(prior_targets.front(), *ast.relation);
    if (!n) {
      throw ResolutionError("no digit " + std::string(relation_name(*ast.relation)) + " of (" +
                            std::to_string(prior_targets.front().row) + "," +
                            std::to_string(prior_targets.front().col) + ")");
    }
    candidates.push_back(*n);
  } else if (ast.scope == Scope::PreviousTargets) {
    if (prior_targets.empty()) throw ResolutionError("question refers to an empty previous target set");
    candidates = prior_targets;
  } else {
    for (std::size_t i = 0; i < kNumCells; ++i) candidates.push_back(CellPos::from_index(i));
  }

  Resolution out;
  for (CellPos p : candidates) {
    if (matches(world.at(p), ast.predicate)) out.targets.push_back(p);
  }

  if (ast.kind == QuestionKind::Count) {
    if (out.targets.size() > kMaxCount) {
      throw CountRangeError("count " + std::to_string(out.targets.size()) + " is outside the answer vocabulary");
    }
    out.answer = count_answer(out.targets.size());
  } else {
    if (out.targets.size() != 1) {
      throw AmbiguityError("attribute question selects " + std::to_string(out.targets.size()) +
                           " digits");
    }
    out.answer = attribute_answer(*ast.queried_attribute, world.at(out.targets.front()).value(*ast.queried_attribute));
  }
  return out;
}

}  // namespace amem::dialog
