// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "amem/dialog/dataset.hpp"
#include "amem/dialog/generator.hpp"
#include "amem/dialog/oracle.hpp"
#include "amem/dialog/render.hpp"
#include "amem/dialog/vocab.hpp"
#include "brute_force.hpp"

namespace amem::dialog {
namespace {

namespace fs = std::filesystem;
using Tokens = std::vector<std::string>;
using testing::brute_force_answer;

GridWorld plain_world() {
  GridWorld w;
  for (std::size_t i = 0; i < kNumCells; ++i) {
    w.cells[i] = DigitCell{CellPos::from_index(i), 0, 0, 1, 0};
  }
  return w;
}

DigitCell& cell(GridWorld& w, int row, int col) { return w.cells[row * 4 + col]; }

// Four 9s, one of them brown, whose left neighbour sits on white.
GridWorld figure_world() {
  GridWorld w = plain_world();
  for (auto [r, c] : {std::pair{0, 0}, {1, 3}, {2, 3}, {3, 1}}) cell(w, r, c).number = 9;
  cell(w, 2, 3).color = 4;    // brown
  cell(w, 2, 2).bgcolor = 2;  // white
  cell(w, 2, 2).style = 1;    // stroke
  return w;
}

QuestionAST count_ast(std::vector<AttrValue> pred, Scope scope = Scope::WholeImage) {
  QuestionAST a;
  a.kind = QuestionKind::Count;
  a.predicate = std::move(pred);
  a.scope = scope;
  a.requires_history = scope == Scope::PreviousTargets;
  return a;
}

QuestionAST attribute_ast(Attribute queried, std::optional<Relation> rel, std::vector<AttrValue> pred = {},
                          Scope scope = Scope::PreviousTargets) {
  QuestionAST a;
  a.kind = QuestionKind::Attribute;
  a.queried_attribute = queried;
  a.relation = rel;
  a.predicate = std::move(pred);
  a.scope = scope;
  a.requires_history = scope == Scope::PreviousTargets || rel.has_value();
  return a;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

TEST(GridWorldTest, SameSeedSameWorld) {
  EXPECT_EQ(generate_world(42), generate_world(42));
  EXPECT_NE(generate_world(42), generate_world(43));
}

TEST(GridWorldTest, CoversEveryPositionOnce) {
  const auto w = generate_world(5);
  for (std::size_t i = 0; i < kNumCells; ++i) EXPECT_EQ(w.cells[i].pos, CellPos::from_index(i));
}

TEST(GridWorldTest, SeedZeroMatchesGoldenFile) {
  std::ifstream is(fs::path(AMEM_TEST_DATA_DIR) / "world_seed0.txt");
  ASSERT_TRUE(is) << "missing golden file";
  std::string line;
  std::getline(is, line);
  const auto w = generate_world(0);
  for (const auto& c : w.cells) {
    int row, col, number;
    std::string color, bg, style;
    ASSERT_TRUE(is >> row >> col >> color >> bg >> number >> style);
    EXPECT_EQ(row, c.pos.row);
    EXPECT_EQ(col, c.pos.col);
    EXPECT_EQ(color, kColorNames[c.color]);
    EXPECT_EQ(bg, kBgColorNames[c.bgcolor]);
    EXPECT_EQ(number, c.number);
    EXPECT_EQ(style, kStyleNames[c.style]);
  }
}

TEST(GridWorldTest, AttributeMarginalsAreUniform) {
  constexpr std::size_t kWorlds = 10000;
  std::map<std::pair<int, int>, std::size_t> counts;
  for (std::size_t s = 0; s < kWorlds; ++s) {
    for (const auto& c : generate_world(s).cells) {
      for (Attribute a : kAllAttributes) ++counts[{static_cast<int>(a), static_cast<int>(c.value(a))}];
    }
  }
  const double n = kWorlds * kNumCells;
  for (Attribute a : kAllAttributes) {
    const double p = 1.0 / static_cast<double>(cardinality(a));
    const double sigma = std::sqrt(n * p * (1 - p));
    for (std::size_t v = 0; v < cardinality(a); ++v) {
      const double k = static_cast<double>(counts[{static_cast<int>(a), static_cast<int>(v)}]);
      EXPECT_LT(std::abs(k - n * p), 3 * sigma) << attribute_name(a) << "=" << v;
    }
  }
}

TEST(VocabTest, ThirtyEightDistinctAnswersInFixedOrder) {
  const auto words = answer_words();
  ASSERT_EQ(words.size(), 38u);
  EXPECT_EQ(std::set<std::string_view>(words.begin(), words.end()).size(), 38u);
  EXPECT_EQ(words[0], "red");
  EXPECT_EQ(words[5], "cyan");
  EXPECT_EQ(words[10], "0");
  EXPECT_EQ(words[20], "flat");
  EXPECT_EQ(words[22], "zero");
  EXPECT_EQ(words[37], "fifteen");
  EXPECT_EQ(answer_word(count_answer(4)), "four");
  EXPECT_THROW(count_answer(16), VocabularyError);
  EXPECT_EQ(answer_word(attribute_answer(Attribute::Number, 7)), "7");
  EXPECT_FALSE(answer_index("sixteen").has_value());
}

TEST(AstTest, StructuralInvariantsEnforced) {
  auto a = attribute_ast(Attribute::Color, std::nullopt, {}, Scope::WholeImage);
  a.queried_attribute.reset();
  EXPECT_THROW(validate_ast(a), std::invalid_argument);
  auto b = count_ast({}, Scope::WholeImage);
  b.relation = Relation::Left;
  b.requires_history = true;
  EXPECT_THROW(validate_ast(b), std::invalid_argument);
  auto c = count_ast({}, Scope::PreviousTargets);
  c.requires_history = false;
  EXPECT_THROW(validate_ast(c), std::invalid_argument);
  auto d = count_ast({{Attribute::Color, 0}, {Attribute::Style, 0}, {Attribute::Number, 0}});
  EXPECT_THROW(validate_ast(d), std::invalid_argument);
}

TEST(OracleTest, CountOfAbsentColorIsZero) {
  const auto w = plain_world();  // all red
  EXPECT_EQ(answer_word(answer_oracle(w, {}, count_ast({{Attribute::Color, 1}}))), "zero");
}

TEST(OracleTest, RelationLeftOfKnownTarget) {
  GridWorld w = plain_world();
  cell(w, 2, 2).number = 4;
  const auto ast = attribute_ast(Attribute::Number, Relation::Left);
  EXPECT_EQ(answer_word(answer_oracle(w, {{2, 3}}, ast)), "4");
}

TEST(OracleTest, FigureDialogChain) {
  const GridWorld w = figure_world();
  const auto q1 = count_ast({{Attribute::Number, 9}});
  const auto r1 = resolve(w, {}, q1);
  EXPECT_EQ(answer_word(r1.answer), "four");
  EXPECT_EQ(r1.targets.size(), 4u);

  const auto q2 = count_ast({{Attribute::Color, 4}}, Scope::PreviousTargets);
  const auto r2 = resolve(w, r1.targets, q2);
  EXPECT_EQ(answer_word(r2.answer), "one");
  ASSERT_EQ(r2.targets, (TargetSet{{2, 3}}));

  const auto q3 = attribute_ast(Attribute::BgColor, Relation::Left);
  const auto r3 = resolve(w, r2.targets, q3);
  EXPECT_EQ(answer_word(r3.answer), "white");
  ASSERT_EQ(r3.targets, (TargetSet{{2, 2}}));

  const auto q4 = attribute_ast(Attribute::Style, std::nullopt);
  EXPECT_EQ(answer_word(answer_oracle(w, r3.targets, q4)), "stroke");
}

TEST(OracleTest, ErrorsAreReportedNotMasked) {
  GridWorld w = plain_world();
  EXPECT_THROW(resolve(w, {}, attribute_ast(Attribute::Color, std::nullopt, {{Attribute::Number, 1}},
                                            Scope::WholeImage)),
               AmbiguityError);
  EXPECT_THROW(resolve(w, {}, attribute_ast(Attribute::Color, std::nullopt, {{Attribute::Number, 5}},
                                            Scope::WholeImage)),
               AmbiguityError);
  EXPECT_THROW(resolve(w, {{0, 0}}, attribute_ast(Attribute::Color, Relation::Left)), ResolutionError);
  EXPECT_THROW(resolve(w, {{0, 0}, {0, 1}}, attribute_ast(Attribute::Color, Relation::Right)), ResolutionError);
  EXPECT_THROW(resolve(w, {}, count_ast({}, Scope::PreviousTargets)), ResolutionError);
  EXPECT_THROW(resolve(w, {}, count_ast({{Attribute::Color, 0}})), CountRangeError);
}

TEST(OracleTest, Deterministic) {
  const GridWorld w = generate_world(9);
  const auto ast = count_ast({{Attribute::Style, 1}});
  EXPECT_EQ(answer_oracle(w, {}, ast), answer_oracle(w, {}, ast));
}

TEST(SurfaceTest, TemplateExamples) {
  EXPECT_EQ(realize_surface(count_ast({{Attribute::Number, 9}})),
            (Tokens{"how", "many", "9", "s", "are", "there", "in", "the", "image", "?"}));
  EXPECT_EQ(realize_surface(attribute_ast(Attribute::Style, std::nullopt)),
            (Tokens{"what", "is", "the", "style", "of", "the", "digit", "?"}));
  EXPECT_EQ(realize_surface(count_ast({{Attribute::Color, 4}}, Scope::PreviousTargets)),
            (Tokens{"how", "many", "brown", "digits", "are", "there", "among", "them", "?"}));
  EXPECT_EQ(realize_surface(attribute_ast(Attribute::BgColor, Relation::Left)),
            (Tokens{"what", "is", "the", "background", "color", "of", "the", "digit", "at", "the", "left", "of",
                    "it", "?"}));
}

class GeneratedItemsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    for (std::uint64_t s = 0; s < 1100; ++s) {
      worlds_.push_back(generate_world(1000 + s));
      dialogs_.push_back(generate_dialog(worlds_.back(), 77 * s + 3));
    }
  }
  static inline std::vector<GridWorld> worlds_;
  static inline std::vector<Dialog> dialogs_;
};

TEST_F(GeneratedItemsTest, BruteForceReproducesEveryAnswer) {
  std::size_t items = 0;
  for (std::size_t d = 0; d < dialogs_.size(); ++d) {
    TargetSet prior;
    for (const auto& item : dialogs_[d].items) {
      ASSERT_EQ(answer_word(item.answer), brute_force_answer(worlds_[d], prior, item.ast)) << "dialog " << d;
      prior = item.targets;
      ++items;
    }
  }
  EXPECT_GE(items, 10000u);
}

TEST_F(GeneratedItemsTest, DialogChainsAreWellFormed) {
  for (std::size_t d = 0; d < dialogs_.size(); ++d) {
    const Dialog& dialog = dialogs_[d];
    ASSERT_EQ(dialog.items.size(), kDialogLength);
    EXPECT_FALSE(dialog.items[0].ast.requires_history);
    TargetSet prior;
    for (const auto& item : dialog.items) {
      validate_ast(item.ast);
      EXPECT_LT(item.answer, kNumAnswers);
      if (item.ast.requires_history) EXPECT_FALSE(prior.empty());
      if (item.ast.relation) EXPECT_EQ(prior.size(), 1u);
      if (item.ast.kind == QuestionKind::Attribute) {
        EXPECT_EQ(item.targets.size(), 1u);
      } else {
        EXPECT_EQ(answer_word(item.answer), answer_word(count_answer(item.targets.size())));
        EXPECT_LE(item.targets.size(), kMaxCount);
      }
      EXPECT_TRUE(std::is_sorted(item.targets.begin(), item.targets.end()));
      EXPECT_EQ(item.surface, realize_surface(item.ast));
      for (const auto& tok : item.surface) EXPECT_TRUE(question_index(tok).has_value()) << tok;
      prior = item.targets;
    }
  }
}

TEST(GeneratorTest, Deterministic) {
  const auto w = generate_world(3);
  const auto a = generate_dialog(w, 11), b = generate_dialog(w, 11);
  for (std::size_t i = 0; i < kDialogLength; ++i) {
    EXPECT_EQ(a.items[i].ast, b.items[i].ast);
    EXPECT_EQ(a.items[i].answer, b.items[i].answer);
  }
}

TEST(GeneratorTest, ExhaustedRejectionsSurfaceAnError) {
  // A world of identical cells cannot support a unique attribute target, and
  // every whole-image count is sixteen or zero.
  GeneratorConfig cfg;
  cfg.p_count = 0.0;
  cfg.max_rejections = 50;
  EXPECT_THROW(generate_dialog(plain_world(), 1, cfg), GenerationError);
}

TEST(RenderTest, DeterministicAndInUnitRange) {
  const auto w = generate_world(21);
  const auto a = render_pixels(w);
  EXPECT_EQ(a, render_pixels(w));
  ASSERT_EQ(a.size(), 3u * 64 * 64);
  for (float v : a) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_EQ(render<float>(w).shape(), (tc::Shape{3, 64, 64}));
}

TEST(RenderTest, CornerPixelIsBackgroundColor) {
  const auto w = generate_world(22);
  const auto px = render_pixels(w);
  for (const auto& c : w.cells) {
    const std::size_t y = c.pos.row * 16, x = c.pos.col * 16;
    for (std::size_t ch = 0; ch < 3; ++ch) {
      EXPECT_EQ(px[ch * 4096 + y * 64 + x], bgcolor_rgb()[c.bgcolor][ch]);
    }
  }
}

TEST(RenderTest, GlyphPixelCountsMatchFontBitmaps) {
  for (std::size_t digit = 0; digit < 10; ++digit) {
    // Flat: each font bit becomes a 2x2 block.
    std::size_t bits = 0;
    for (auto row : glyph(digit)) bits += static_cast<std::size_t>(std::popcount(row));
    // Stroke: drop scaled pixels whose 3x3 neighbourhood is fully set.
    auto scaled = [&](int y, int x) {
      if (y < 0 || x < 0 || y >= 14 || x >= 10) return false;
      return ((glyph(digit)[y / 2] >> (4 - x / 2)) & 1) != 0;
    };
    std::size_t outline = 0;
    for (int y = 0; y < 14; ++y)
      for (int x = 0; x < 10; ++x) {
        if (!scaled(y, x)) continue;
        bool interior = true;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) interior &= scaled(y + dy, x + dx);
        outline += interior ? 0 : 1;
      }
    ASSERT_GT(outline, 0u);
    ASSERT_LT(outline, 4 * bits) << "digit " << digit << " has no interior";

    for (std::uint8_t style = 0; style < 2; ++style) {
      GridWorld w = plain_world();
      cell(w, 1, 2).number = static_cast<std::uint8_t>(digit);
      cell(w, 1, 2).style = style;
      const auto px = render_pixels(w);
      std::size_t fg = 0;
      for (std::size_t y = 16; y < 32; ++y)
        for (std::size_t x = 32; x < 48; ++x) {
          const bool is_fg = px[y * 64 + x] == color_rgb()[0][0] && px[4096 + y * 64 + x] == color_rgb()[0][1];
          fg += is_fg ? 1 : 0;
        }
      EXPECT_EQ(fg, style == 0 ? 4 * bits : outline) << "digit " << digit << " style " << int(style);
    }
  }
}

TEST(DatasetTest, JsonRoundTrip) {
  DatasetConfig cfg;
  cfg.n_train = 4;
  const auto records = generate_split(cfg, Split::Train);
  for (const auto& r : records) {
    const auto back = record_from_json(nlohmann::json::parse(to_json(r).dump()));
    EXPECT_EQ(back.world, r.world);
    EXPECT_EQ(back.image_seed, r.image_seed);
    ASSERT_EQ(back.dialog.items.size(), kDialogLength);
    for (std::size_t i = 0; i < kDialogLength; ++i) {
      EXPECT_EQ(back.dialog.items[i].ast, r.dialog.items[i].ast);
      EXPECT_EQ(back.dialog.items[i].surface, r.dialog.items[i].surface);
      EXPECT_EQ(back.dialog.items[i].answer, r.dialog.items[i].answer);
      EXPECT_EQ(back.dialog.items[i].targets, r.dialog.items[i].targets);
    }
  }
}

TEST(DatasetTest, RecordsCarryTheDocumentedFields) {
  DatasetConfig cfg;
  cfg.n_train = 1;
  const auto j = to_json(generate_split(cfg, Split::Train).at(0));
  for (const char* key : {"world_id", "image_seed", "grid", "dialog"}) EXPECT_TRUE(j.contains(key)) << key;
  ASSERT_EQ(j["grid"].size(), 4u);
  EXPECT_EQ(j["grid"][0].size(), 4u);
  for (const char* key : {"color", "bgcolor", "number", "style"}) EXPECT_TRUE(j["grid"][0][0].contains(key));
  ASSERT_EQ(j["dialog"].size(), 10u);
  for (const char* key : {"q_tokens", "q_ast", "answer", "requires_history", "targets"}) {
    EXPECT_TRUE(j["dialog"][0].contains(key)) << key;
  }
}

TEST(DatasetTest, MalformedRecordsRejected) {
  DatasetConfig cfg;
  cfg.n_train = 1;
  auto j = to_json(generate_split(cfg, Split::Train).at(0));
  auto bad_answer = j;
  bad_answer["dialog"][0]["answer"] = "sixteen";
  EXPECT_THROW(record_from_json(bad_answer), std::invalid_argument);
  auto short_dialog = j;
  short_dialog["dialog"].erase(0);
  EXPECT_THROW(record_from_json(short_dialog), std::invalid_argument);
  auto bad_token = j;
  bad_token["dialog"][0]["q_tokens"][0] = "zebra";
  EXPECT_THROW(record_from_json(bad_token), VocabularyError);
}

TEST(DatasetTest, SameSeedGivesByteIdenticalFiles) {
  DatasetConfig cfg;
  cfg.n_train = 5;
  cfg.n_val = 2;
  cfg.n_test = 2;
  const fs::path root = fs::temp_directory_path() / ("amem_ds_" + std::to_string(::getpid()));
  generate_dataset(cfg, root / "a");
  generate_dataset(cfg, root / "b");
  for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "manifest.json"}) {
    const auto a = read_file(root / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, read_file(root / "b" / f)) << f;
  }
  const auto manifest = nlohmann::json::parse(read_file(root / "a" / "manifest.json"));
  EXPECT_EQ(manifest["vocab"].size(), 38u);
  EXPECT_EQ(manifest["counts"]["train"], 15);
  EXPECT_EQ(load_jsonl(root / "a" / "val.jsonl").size(), 6u);
  fs::remove_all(root);
}

TEST(DatasetTest, InvalidSizesRejected) {
  DatasetConfig cfg;
  cfg.n_val = 0;
  EXPECT_THROW(generate_dataset(cfg, fs::temp_directory_path() / "amem_never"), std::invalid_argument);
}

TEST(DatasetTest, SplitsShareNoWorldSeed) {
  DatasetConfig cfg;
  std::set<std::uint64_t> seen;
  std::size_t total = 0;
  for (Split s : {Split::Train, Split::Val, Split::Test}) {
    const std::size_t n = s == Split::Train ? 30000 : 10000;
    for (std::size_t i = 0; i < n; ++i) seen.insert(image_seed(cfg.base_seed, s, i));
    total += n;
  }
  EXPECT_EQ(seen.size(), total);
}

// Attribute proposals name their target unambiguously, so rejection sampling
// does not drift the realized kind mix away from p_count, even at step 1
// where no antecedent exists.
TEST(GeneratorTest, RealizedKindMixTracksPolicy) {
  const GeneratorConfig cfg;
  std::size_t counts = 0, total = 0, first_counts = 0, firsts = 0;
  for (std::uint64_t s = 0; s < 600; ++s) {
    const auto d = generate_dialog(generate_world(9000 + s), s, cfg);
    for (std::size_t t = 0; t < d.items.size(); ++t) {
      const bool count = d.items[t].ast.kind == QuestionKind::Count;
      counts += count ? 1 : 0;
      ++total;
      if (t == 0) {
        first_counts += count ? 1 : 0;
        ++firsts;
      }
    }
  }
  EXPECT_NEAR(static_cast<double>(counts) / total, cfg.p_count, 0.06);
  EXPECT_NEAR(static_cast<double>(first_counts) / firsts, cfg.p_count, 0.08);
}

TEST(AmbiguityTest, FirstQuestionsOnlyIsZero) {
  std::vector<Dialog> firsts;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Dialog d = generate_dialog(generate_world(s), s);
    d.items.resize(1);
    firsts.push_back(d);
  }
  EXPECT_EQ(ambiguity_rate(firsts), 0.0);
}

TEST(AmbiguityTest, OneFollowUpInTwoIsHalf) {
  Dialog d;
  d.items.push_back({count_ast({{Attribute::Number, 9}}), {}, 0, {}});
  d.items.push_back({count_ast({{Attribute::Color, 4}}, Scope::PreviousTargets), {}, 0, {}});
  EXPECT_EQ(ambiguity_rate(std::vector<Dialog>{d}), 0.5);
  EXPECT_THROW(ambiguity_rate(std::vector<Dialog>{}), std::invalid_argument);
}

}  // namespace
}  // namespace amem::dialog
