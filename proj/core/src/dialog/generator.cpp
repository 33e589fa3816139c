// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/dialog/generator.hpp"

#include <algorithm>
#include <optional>

#include "amem/dialog/oracle.hpp"
#include "amem/dialog/vocab.hpp"
#include "amem/util/splitmix.hpp"

namespace amem::dialog {
namespace {

const AttrValue* find_term(const std::vector<AttrValue>& predicate, Attribute a) {
  for (const auto& t : predicate) {
    if (t.attr == a) return &t;
  }
  return nullptr;
}

void append_attribute_noun(std::vector<std::string>& out, Attribute a) {
  if (a == Attribute::BgColor) {
    out.emplace_back("background");
    out.emplace_back("color");
  } else {
    out.emplace_back(attribute_name(a));
  }
}

// Adjectives in fixed order: style, color, then the noun, then "with <bg>
// background". A number term replaces the plural noun ("9 s") or precedes
// the singular one ("9 digit").
void append_noun_phrase(std::vector<std::string>& out, const std::vector<AttrValue>& predicate,
                        bool plural) {
  if (const auto* t = find_term(predicate, Attribute::Style)) out.emplace_back(value_name(t->attr, t->value));
  if (const auto* t = find_term(predicate, Attribute::Color)) out.emplace_back(value_name(t->attr, t->value));
  const auto* number = find_term(predicate, Attribute::Number);
  if (plural) {
    if (number) {
      out.emplace_back(value_name(number->attr, number->value));
      out.emplace_back("s");
    } else {
      out.emplace_back("digits");
    }
  } else {
    if (number) out.emplace_back(value_name(number->attr, number->value));
    out.emplace_back("digit");
  }
  if (const auto* t = find_term(predicate, Attribute::BgColor)) {
    out.emplace_back("with");
    out.emplace_back(value_name(t->attr, t->value));
    out.emplace_back("background");
  }
}

std::string_view direction_word(Relation r) {
  switch (r) {
    case Relation::Left: return "left";
    case Relation::Right: return "right";
    case Relation::Above: return "top";
    case Relation::Below: return "bottom";
  }
  return "";
}

// Draws 1-2 distinct attributes with values copied from `source` (so the
// predicate selects at least that cell).
std::vector<AttrValue> predicate_from_cell(SplitMix64& rng, const DigitCell& source, std::size_t terms) {
  std::vector<Attribute> attrs(kAllAttributes.begin(), kAllAttributes.end());
  std::vector<AttrValue> pred;
  for (std::size_t i = 0; i < terms; ++i) {
    const std::size_t k = i + rng.uniform_index(attrs.size() - i);
    std::swap(attrs[i], attrs[k]);
    pred.push_back({attrs[i], static_cast<std::uint8_t>(source.value(attrs[i]))});
  }
  std::sort(pred.begin(), pred.end(), [](const AttrValue& a, const AttrValue& b) { return a.attr < b.attr; });
  return pred;
}

std::vector<AttrValue> random_predicate(SplitMix64& rng, std::size_t terms) {
  DigitCell synthetic;
  synthetic.color = static_cast<std::uint8_t>(rng.uniform_index(cardinality(Attribute::Color)));
  synthetic.bgcolor = static_cast<std::uint8_t>(rng.uniform_index(cardinality(Attribute::BgColor)));
  synthetic.number = static_cast<std::uint8_t>(rng.uniform_index(cardinality(Attribute::Number)));
  synthetic.style = static_cast<std::uint8_t>(rng.uniform_index(cardinality(Attribute::Style)));
  return predicate_from_cell(rng, synthetic, terms);
}

// A 1-2 term predicate, avoiding `excluded`, that `source` alone satisfies
// within `scope`. Uniform over all such predicates; nullopt if none exists.
std::optional<std::vector<AttrValue>> identifying_predicate(SplitMix64& rng, const GridWorld& world,
                                                            const std::vector<CellPos>& scope,
                                                            const DigitCell& source, Attribute excluded) {
  std::vector<Attribute> attrs;
  for (Attribute a : kAllAttributes) {
    if (a != excluded) attrs.push_back(a);
  }
  std::vector<std::vector<AttrValue>> unique;
  auto consider = [&](std::vector<AttrValue> pred) {
    std::size_t matches = 0;
    for (CellPos p : scope) {
      const DigitCell& c = world.at(p);
      bool ok = true;
      for (const auto& t : pred) ok &= c.value(t.attr) == t.value;
      matches += ok ? 1 : 0;
    }
    if (matches == 1) unique.push_back(std::move(pred));
  };
  auto term = [&](Attribute a) { return AttrValue{a, static_cast<std::uint8_t>(source.value(a))}; };
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    consider({term(attrs[i])});
    for (std::size_t j = i + 1; j < attrs.size(); ++j) consider({term(attrs[i]), term(attrs[j])});
  }
  if (unique.empty()) return std::nullopt;
  return unique[rng.uniform_index(unique.size())];
}

QuestionAST propose(SplitMix64& rng, const GridWorld& world, const TargetSet& prior,
                    const GeneratorConfig& cfg) {
  QuestionAST ast;
  ast.kind = rng.bernoulli(cfg.p_count) ? QuestionKind::Count : QuestionKind::Attribute;
  const bool follow_up = !prior.empty() && rng.bernoulli(cfg.p_follow_up);
  ast.scope = follow_up ? Scope::PreviousTargets : Scope::WholeImage;

  auto scope_cell = [&]() -> const DigitCell& {
    if (follow_up) return world.at(prior[rng.uniform_index(prior.size())]);
    return world.cells[rng.uniform_index(kNumCells)];
  };

  if (ast.kind == QuestionKind::Count) {
    // Whole-image counts need a predicate; follow-ups may count the whole set.
    const double u = rng.uniform();
    const std::size_t terms = follow_up ? (u < 0.25 ? 0 : u < 0.75 ? 1 : 2) : (u < 0.7 ? 1 : 2);
    if (rng.bernoulli(0.8)) {
      const DigitCell& src = scope_cell();
      ast.predicate = predicate_from_cell(rng, src, terms);
    } else {
      ast.predicate = random_predicate(rng, terms);
    }
  } else {
    ast.queried_attribute = kAllAttributes[rng.uniform_index(kAllAttributes.size())];
    if (follow_up && prior.size() == 1) {
      if (rng.bernoulli(cfg.p_relation)) {
        ast.relation = static_cast<Relation>(rng.uniform_index(4));
      }
    } else {
      std::vector<CellPos> scope = prior;
      if (!follow_up) {
        scope.clear();
        for (const DigitCell& c : world.cells) scope.push_back(c.pos);
      }
      const DigitCell& src = world.at(scope[rng.uniform_index(scope.size())]);
      if (auto pred = identifying_predicate(rng, world, scope, src, *ast.queried_attribute)) {
        ast.predicate = std::move(*pred);
      } else {
        ast.predicate = predicate_from_cell(rng, src, rng.bernoulli(0.5) ? 1 : 2);
      }
    }
  }
  ast.requires_history = ast.scope == Scope::PreviousTargets || ast.relation.has_value();
  return ast;
}

bool acceptable(const QuestionAST& ast) {
  if (ast.kind == QuestionKind::Attribute && find_term(ast.predicate, *ast.queried_attribute)) {
    return false;  // the answer would be stated in the question
  }
  return true;
}

}  // namespace

std::vector<std::string> realize_surface(const QuestionAST& ast) {
  validate_ast(ast);
  std::vector<std::string> out;
  if (ast.kind == QuestionKind::Count) {
    out = {"how", "many"};
    append_noun_phrase(out, ast.predicate, /*plural=*/true);
    out.insert(out.end(), {"are", "there"});
    if (ast.scope == Scope::PreviousTargets) {
      out.insert(out.end(), {"among", "them"});
    } else {
      out.insert(out.end(), {"in", "the", "image"});
    }
  } else {
    out = {"what", "is", "the"};
    append_attribute_noun(out, *ast.queried_attribute);
    out.insert(out.end(), {"of", "the"});
    if (ast.relation) {
      out.insert(out.end(), {"digit", "at", "the"});
      out.emplace_back(direction_word(*ast.relation));
      out.insert(out.end(), {"of", "it"});
    } else {
      append_noun_phrase(out, ast.predicate, /*plural=*/false);
    }
  }
  out.emplace_back("?");
  return out;
}

Dialog generate_dialog(const GridWorld& world, std::uint64_t seed, const GeneratorConfig& config) {
  Dialog d;
  d.seed = seed;
  SplitMix64 rng(seed);
  TargetSet prior;
  for (std::size_t step = 0; step < kDialogLength; ++step) {
    std::optional<QAItem> item;
    for (std::uint32_t attempt = 0; attempt <= config.max_rejections && !item; ++attempt) {
      QuestionAST ast = propose(rng, world, prior, config);
      if (!acceptable(ast)) continue;
      try {
        Resolution r = resolve(world, prior, ast);
        item = QAItem{ast, realize_surface(ast), r.answer, std::move(r.targets)};
      } catch (const OracleError&) {
        // rejected: ambiguous, unresolvable, or out-of-vocabulary count
      }
    }
    if (!item) {
      throw GenerationError("no valid question after " + std::to_string(config.max_rejections) +
                            " rejections at step " + std::to_string(step) + " (seed " +
                            std::to_string(seed) + ")");
    }
    prior = item->targets;
    d.items.push_back(std::move(*item));
  }
  return d;
}

}  // namespace amem::dialog
