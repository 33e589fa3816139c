// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>

#include "amem/dialog/grid_world.hpp"
#include "amem/dialog/question.hpp"

namespace amem::dialog {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An Attribute question whose selection is empty or has several cells.
class AmbiguityError : public OracleError {
 public:
  using OracleError::OracleError;
};

// A spatial relation pointing outside the grid, or a missing antecedent.
class ResolutionError : public OracleError {
 public:
  using OracleError::OracleError;
};

// A count with no answer word (16).
class CountRangeError : public OracleError {
 public:
  using OracleError::OracleError;
};

struct Resolution {
  std::size_t answer = 0;  // answer word index
  TargetSet targets;       // counted set, or the single attribute target
};

// Resolves `ast` against `world` given the previous question's targets.
// Pure and deterministic.
Resolution resolve(const GridWorld& world, const TargetSet& prior_targets, const QuestionAST& ast);

inline std::size_t answer_oracle(const GridWorld& world, const TargetSet& prior_targets,
                                 const QuestionAST& ast) {
  return resolve(world, prior_targets, ast).answer;
}

}  // namespace amem::dialog
