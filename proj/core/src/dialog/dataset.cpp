// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/dialog/dataset.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

#include "amem/dialog/vocab.hpp"
#include "amem/util/splitmix.hpp"

namespace amem::dialog {
namespace {

using nlohmann::json;

template <typename Opt>
auto required(const std::optional<Opt>& v, std::string_view what, std::string_view got) {
  if (!v) throw std::invalid_argument("dataset: bad " + std::string(what) + " '" + std::string(got) + "'");
  return *v;
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "";
}

std::uint64_t image_seed(std::uint64_t base_seed, Split split, std::size_t index) {
  // 2^40 seeds per split.
  return base_seed + (static_cast<std::uint64_t>(split) << 40) + index;
}

std::uint64_t dialog_seed(std::uint64_t image_seed, std::size_t dialog_index) {
  return splitmix64(splitmix64(image_seed) + dialog_index);
}

json to_json(const QuestionAST& ast) {
  json pred = json::array();
  for (const auto& t : ast.predicate) {
    pred.push_back({{"attr", attribute_name(t.attr)}, {"value", value_name(t.attr, t.value)}});
  }
  json j = {{"kind", kind_name(ast.kind)},
            {"predicate", std::move(pred)},
            {"scope", scope_name(ast.scope)},
            {"relation", nullptr},
            {"queried_attribute", nullptr},
            {"requires_history", ast.requires_history}};
  if (ast.relation) j["relation"] = relation_name(*ast.relation);
  if (ast.queried_attribute) j["queried_attribute"] = attribute_name(*ast.queried_attribute);
  return j;
}

QuestionAST ast_from_json(const json& j) {
  QuestionAST ast;
  const auto kind = j.at("kind").get<std::string>();
  ast.kind = required(parse_kind(kind), "kind", kind);
  for (const auto& t : j.at("predicate")) {
    const auto attr_name = t.at("attr").get<std::string>();
    const auto value = t.at("value").get<std::string>();
    const Attribute a = required(parse_attribute(attr_name), "attribute", attr_name);
    ast.predicate.push_back({a, static_cast<std::uint8_t>(required(parse_value(a, value), "value", value))});
  }
  const auto scope = j.at("scope").get<std::string>();
  ast.scope = required(parse_scope(scope), "scope", scope);
  if (!j.at("relation").is_null()) {
    const auto rel = j.at("relation").get<std::string>();
    ast.relation = required(parse_relation(rel), "relation", rel);
  }
  if (!j.at("queried_attribute").is_null()) {
    const auto q = j.at("queried_attribute").get<std::string>();
    ast.queried_attribute = required(parse_attribute(q), "attribute", q);
  }
  ast.requires_history = j.at("requires_history").get<bool>();
  validate_ast(ast);
  return ast;
}

json to_json(const DialogRecord& r) {
  json grid = json::array();
  for (std::size_t row = 0; row < kGridSide; ++row) {
    json line = json::array();
    for (std::size_t col = 0; col < kGridSide; ++col) {
      const DigitCell& c = r.world.cells[row * kGridSide + col];
      line.push_back({{"color", kColorNames[c.color]},
                      {"bgcolor", kBgColorNames[c.bgcolor]},
                      {"number", c.number},
                      {"style", kStyleNames[c.style]}});
    }
    grid.push_back(std::move(line));
  }
  json items = json::array();
  for (const auto& item : r.dialog.items) {
    json targets = json::array();
    for (CellPos p : item.targets) targets.push_back({p.row, p.col});
    items.push_back({{"q_tokens", item.surface},
                     {"q_ast", to_json(item.ast)},
                     {"answer", answer_word(item.answer)},
                     {"requires_history", item.ast.requires_history},
                     {"targets", std::move(targets)}});
  }
  return {{"world_id", r.world_id},
          {"image_seed", r.image_seed},
          {"dialog_seed", r.dialog.seed},
          {"grid", std::move(grid)},
          {"dialog", std::move(items)}};
}

DialogRecord record_from_json(const json& j) {
  DialogRecord r;
  r.world_id = j.at("world_id").get<std::uint64_t>();
  r.image_seed = j.at("image_seed").get<std::uint64_t>();
  r.world.seed = r.image_seed;
  const auto& grid = j.at("grid");
  if (grid.size() != kGridSide) throw std::invalid_argument("dataset: grid must have 4 rows");
  for (std::size_t row = 0; row < kGridSide; ++row) {
    if (grid[row].size() != kGridSide) throw std::invalid_argument("dataset: grid rows must have 4 cells");
    for (std::size_t col = 0; col < kGridSide; ++col) {
      const auto& cj = grid[row][col];
      DigitCell& c = r.world.cells[row * kGridSide + col];
      c.pos = {static_cast<std::uint8_t>(row), static_cast<std::uint8_t>(col)};
      const auto color = cj.at("color").get<std::string>();
      const auto bg = cj.at("bgcolor").get<std::string>();
      const auto style = cj.at("style").get<std::string>();
      const auto number = cj.at("number").get<int>();
      if (number < 0 || number > 9) throw std::invalid_argument("dataset: digit out of range");
      c.color = static_cast<std::uint8_t>(required(parse_value(Attribute::Color, color), "color", color));
      c.bgcolor = static_cast<std::uint8_t>(required(parse_value(Attribute::BgColor, bg), "bgcolor", bg));
      c.style = static_cast<std::uint8_t>(required(parse_value(Attribute::Style, style), "style", style));
      c.number = static_cast<std::uint8_t>(number);
    }
  }
  r.dialog.world_id = r.world_id;
  if (j.contains("dialog_seed")) r.dialog.seed = j.at("dialog_seed").get<std::uint64_t>();
  for (const auto& ij : j.at("dialog")) {
    QAItem item;
    item.ast = ast_from_json(ij.at("q_ast"));
    item.surface = ij.at("q_tokens").get<std::vector<std::string>>();
    for (const auto& tok : item.surface) question_index_or_throw(tok);
    const auto answer = ij.at("answer").get<std::string>();
    item.answer = required(answer_index(answer), "answer", answer);
    for (const auto& t : ij.at("targets")) {
      item.targets.push_back({t.at(0).get<std::uint8_t>(), t.at(1).get<std::uint8_t>()});
    }
    r.dialog.items.push_back(std::move(item));
  }
  if (r.dialog.items.size() != kDialogLength) {
    throw std::invalid_argument("dataset: dialog must have exactly 10 items");
  }
  return r;
}

std::vector<DialogRecord> generate_split(const DatasetConfig& config, Split split) {
  const std::size_t n = split == Split::Train ? config.n_train : split == Split::Val ? config.n_val : config.n_test;
  std::vector<DialogRecord> out;
  out.reserve(n * config.dialogs_per_image);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t seed = image_seed(config.base_seed, split, i);
    const GridWorld world = generate_world(seed);
    for (std::size_t k = 0; k < config.dialogs_per_image; ++k) {
      DialogRecord r;
      r.world_id = i;
      r.image_seed = seed;
      r.world = world;
      r.dialog = generate_dialog(world, dialog_seed(seed, k), config.generator);
      r.dialog.world_id = i;
      out.push_back(std::move(r));
    }
  }
  return out;
}

json manifest_json(const DatasetConfig& config) {
  json vocab = json::array();
  for (auto w : answer_words()) vocab.push_back(w);
  json qvocab = json::array();
  for (auto w : question_words()) qvocab.push_back(w);
  return {{"version", kDatasetVersion},
          {"vocab", std::move(vocab)},
          {"question_vocab", std::move(qvocab)},
          {"counts",
           {{"train", config.n_train * config.dialogs_per_image},
            {"val", config.n_val * config.dialogs_per_image},
            {"test", config.n_test * config.dialogs_per_image},
            {"images", {{"train", config.n_train}, {"val", config.n_val}, {"test", config.n_test}}}}},
          {"config",
           {{"base_seed", config.base_seed},
            {"dialogs_per_image", config.dialogs_per_image},
            {"p_count", config.generator.p_count},
            {"p_follow_up", config.generator.p_follow_up},
            {"p_relation", config.generator.p_relation},
            {"max_rejections", config.generator.max_rejections}}}};
}

void write_jsonl(const std::filesystem::path& path, std::span<const DialogRecord> records) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  for (const auto& r : records) os << to_json(r).dump() << '\n';
  if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::vector<DialogRecord> load_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open dataset '" + path.string() + "'");
  std::vector<DialogRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void generate_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir) {
  if (config.n_train == 0 || config.n_val == 0 || config.n_test == 0 || config.dialogs_per_image == 0) {
    throw std::invalid_argument("dataset sizes must be at least 1");
  }
  std::filesystem::create_directories(out_dir);
  for (Split s : {Split::Train, Split::Val, Split::Test}) {
    const auto records = generate_split(config, s);
    write_jsonl(out_dir / (std::string(split_name(s)) + ".jsonl"), records);
  }
  std::ofstream os(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write manifest in '" + out_dir.string() + "'");
  os << manifest_json(config).dump(2) << '\n';
}

double ambiguity_rate(std::span<const Dialog> dialogs) {
  std::size_t total = 0, history = 0;
  for (const auto& d : dialogs) {
    for (const auto& item : d.items) {
      ++total;
      history += item.ast.requires_history ? 1 : 0;
    }
  }
  if (total == 0) throw std::invalid_argument("ambiguity_rate: empty dataset");
  return static_cast<double>(history) / static_cast<double>(total);
}

double ambiguity_rate(std::span<const DialogRecord> records) {
  std::vector<Dialog> dialogs;
  dialogs.reserve(records.size());
  for (const auto& r : records) dialogs.push_back(r.dialog);
  return ambiguity_rate(dialogs);
}

}  // namespace amem::dialog
