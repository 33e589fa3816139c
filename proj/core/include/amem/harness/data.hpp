// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "amem/dialog/dataset.hpp"
#include "amem/dialog/question.hpp"
#include "amem/model/model.hpp"

namespace amem::harness {

class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A dialog in model-ready form. Dialogs of the same image share pixels.
struct EncodedDialog {
  std::uint64_t world_id = 0;
  std::shared_ptr<const std::vector<float>> image;  // [3 x side x side]
  std::size_t image_side = 0;
  std::array<model::TokenIds, dialog::kDialogLength> questions;
  std::array<std::size_t, dialog::kDialogLength> answers{};
  std::array<dialog::QuestionKind, dialog::kDialogLength> kinds{};
};

std::vector<EncodedDialog> encode_records(std::span<const dialog::DialogRecord> records);

template <typename T>
tc::Tensor<T> image_tensor(const EncodedDialog& d) {
  std::vector<T> v(d.image->begin(), d.image->end());
  return tc::Tensor<T>({3, d.image_side, d.image_side}, std::move(v));
}

struct DatasetSplits {
  std::vector<dialog::DialogRecord> train, val, test;
};

// Loads <dir>/{train,val,test}.jsonl after checking that manifest.json
// describes the same answer and question vocabularies as this build.
DatasetSplits load_dataset_dir(const std::filesystem::path& dir);
std::vector<dialog::DialogRecord> load_split(const std::filesystem::path& dir, dialog::Split split);
void check_manifest(const std::filesystem::path& dir);

// Fails with ConfigurationError if the model cannot consume these dialogs.
void check_compatible(const model::ModelConfig& config, std::span<const EncodedDialog> dialogs);

template <typename T>
struct DialogPass {
  tc::Tensor<T> loss;  // sum of the ten per-step cross entropies
  std::array<std::size_t, dialog::kDialogLength> predicted{};
  std::array<double, dialog::kDialogLength> step_loss{};
  std::vector<std::vector<double>> beta;  // per step, memory variants only
};

// Teacher-forced pass over one dialog: ground-truth answers feed the history
// encoder and the memory keys.
template <typename T>
DialogPass<T> run_dialog(const model::AmemModel<T>& m, tc::Graph<T>& g, const EncodedDialog& d,
                         bool collect_beta = false);

extern template DialogPass<float> run_dialog(const model::AmemModel<float>&, tc::Graph<float>&,
                                             const EncodedDialog&, bool);
extern template DialogPass<double> run_dialog(const model::AmemModel<double>&, tc::Graph<double>&,
                                              const EncodedDialog&, bool);

}  // namespace amem::harness
