// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amem/harness/data.hpp"
#include "amem/harness/evaluate.hpp"
#include "amem/model/config.hpp"
#include "amem/tensor/adam.hpp"

namespace amem::harness {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::size_t epochs = 15;
  std::size_t batch_size = 32;  // dialogs per Adam step
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
  model::ModelConfig model;
  std::size_t checkpoint_interval = 1;  // epochs; 0 keeps only the final checkpoint
  std::filesystem::path out_dir;        // metrics, checkpoints, model.json
  std::size_t eval_threads = 1;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  float train_loss = 0;
  float val_accuracy = 0;
  float theta = 0;  // NaN without sequential preference
  std::array<float, dialog::kDialogLength> val_step_accuracy{};
};

struct TrainResult {
  tc::ParamSet<float> params;
  std::vector<EpochMetrics> metrics;
  std::filesystem::path final_checkpoint;
};

struct TrainHooks {
  std::function<void(const EpochMetrics&)> on_epoch;
  // Called after the batch gradient is formed and before the Adam update.
  std::function<void(tc::ParamSet<float>&)> after_gradient;
};

// Files written into out_dir:
//   metrics.csv            epoch,train_loss,val_acc,theta
//   step_accuracy.json     validation accuracy per dialog step, per epoch
//   model.json             model configuration of the checkpoints
//   epoch_NNNN.amem        checkpoint every checkpoint_interval epochs
//   final.amem             parameters after the last epoch
// Checkpoints carry the Adam moments and the metrics so far, which is all a
// resumed run needs: the batch order of an epoch depends only on (seed, epoch).
TrainResult train(const TrainConfig& config, std::span<const EncodedDialog> train_set,
                  std::span<const EncodedDialog> val_set, const std::optional<std::filesystem::path>& resume = {},
                  const TrainHooks& hooks = {});

// Permutation of [0, n) used for the given (1-based) epoch.
std::vector<std::size_t> epoch_order(std::uint64_t seed, std::size_t epoch, std::size_t n);

std::string metrics_csv(std::span<const EpochMetrics> metrics);

// Loads a parameter checkpoint into a model of the given configuration.
model::AmemModel<float> load_model(const model::ModelConfig& config, const std::filesystem::path& checkpoint);

void write_model_config(const std::filesystem::path& path, const model::ModelConfig& config);
model::ModelConfig read_model_config(const std::filesystem::path& path);

}  // namespace amem::harness
