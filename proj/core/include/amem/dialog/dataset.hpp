// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amem/dialog/generator.hpp"
#include "amem/dialog/grid_world.hpp"
#include "amem/dialog/question.hpp"

namespace amem::dialog {

inline constexpr int kDatasetVersion = 1;

struct DatasetConfig {
  std::size_t n_train = 3000;
  std::size_t n_val = 500;
  std::size_t n_test = 500;
  std::size_t dialogs_per_image = 3;
  std::uint64_t base_seed = 0;
  GeneratorConfig generator;
};

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };
std::string_view split_name(Split s);

// Image seeds of different splits come from disjoint ranges.
std::uint64_t image_seed(std::uint64_t base_seed, Split split, std::size_t index);
std::uint64_t dialog_seed(std::uint64_t image_seed, std::size_t dialog_index);

struct DialogRecord {
  std::uint64_t world_id = 0;  // image index within its split
  std::uint64_t image_seed = 0;
  GridWorld world;
  Dialog dialog;
};

nlohmann::json to_json(const QuestionAST& ast);
QuestionAST ast_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DialogRecord& record);
DialogRecord record_from_json(const nlohmann::json& j);

std::vector<DialogRecord> generate_split(const DatasetConfig& config, Split split);

nlohmann::json manifest_json(const DatasetConfig& config);

// Writes train.jsonl, val.jsonl, test.jsonl and manifest.json into `out_dir`.
void generate_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir);

void write_jsonl(const std::filesystem::path& path, std::span<const DialogRecord> records);
std::vector<DialogRecord> load_jsonl(const std::filesystem::path& path);

// Fraction of questions that require dialog history.
double ambiguity_rate(std::span<const Dialog> dialogs);
double ambiguity_rate(std::span<const DialogRecord> records);

}  // namespace amem::dialog
