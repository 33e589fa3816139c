// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "amem/dialog/grid_world.hpp"
#include "amem/dialog/question.hpp"

namespace amem::dialog {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratorConfig {
  double p_count = 0.4;          // else Attribute
  double p_follow_up = 0.95;     // history-dependent scope when an antecedent exists
  double p_relation = 0.5;       // spatial relation for follow-ups on a single target
  std::uint32_t max_rejections = 1000;  // per question
};

// Lowercase token list from the fixed template set.
std::vector<std::string> realize_surface(const QuestionAST& ast);

// Ten question/answer items over `world`. Candidate questions whose answer is
// undefined, non-unique or out of vocabulary are rejected and redrawn.
Dialog generate_dialog(const GridWorld& world, std::uint64_t seed,
                       const GeneratorConfig& config = {});

}  // namespace amem::dialog
