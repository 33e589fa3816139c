// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "amem/tensor/checkpoint.hpp"
#include "amem/util/splitmix.hpp"

namespace amem::harness {
namespace {

constexpr const char* kMomentPrefix1 = "adam.m/";
constexpr const char* kMomentPrefix2 = "adam.v/";

std::string format_float(float v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write '" + tmp + "'");
    os << text;
    if (!os) throw std::runtime_error("failed writing '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json step_accuracy_json(std::span<const EpochMetrics> metrics) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& m : metrics) {
    nlohmann::json acc = nlohmann::json::array();
    for (float a : m.val_step_accuracy) acc.push_back(static_cast<double>(a));
    rows.push_back({{"epoch", m.epoch}, {"val_step_accuracy", std::move(acc)}});
  }
  return rows;
}

tc::CheckpointEntry scalar_entry(std::string name, float v) { return {std::move(name), {1}, {v}}; }

std::vector<tc::CheckpointEntry> training_entries(const tc::ParamSet<float>& params,
                                                  const tc::AdamState<float>& adam, std::size_t epoch,
                                                  std::span<const EpochMetrics> metrics) {
  auto entries = tc::to_entries(params);
  std::size_t i = 0;
  for (const auto& p : params) {
    const auto dims = entries[i].dims;
    entries.push_back({kMomentPrefix1 + p.name, dims, adam.first_moment[i]});
    entries.push_back({kMomentPrefix2 + p.name, dims, adam.second_moment[i]});
    ++i;
  }
  // Step counts stay far below 2^24, so f32 holds them exactly.
  entries.push_back(scalar_entry("adam.step", static_cast<float>(adam.step)));
  entries.push_back(scalar_entry("train.epoch", static_cast<float>(epoch)));
  if (!metrics.empty()) {
    tc::CheckpointEntry m{"train.metrics", {static_cast<std::uint32_t>(metrics.size()), 3 + dialog::kDialogLength}, {}};
    for (const auto& row : metrics) {
      m.values.insert(m.values.end(), {row.train_loss, row.val_accuracy, row.theta});
      m.values.insert(m.values.end(), row.val_step_accuracy.begin(), row.val_step_accuracy.end());
    }
    entries.push_back(std::move(m));
  }
  return entries;
}

float entry_scalar(const std::vector<tc::CheckpointEntry>& entries, const std::string& name) {
  const auto* e = tc::find_entry(entries, name);
  if (!e || e->values.size() != 1) throw ConfigurationError("checkpoint lacks '" + name + "' needed to resume");
  return e->values[0];
}

// Parameter entries the model does not have mean the checkpoint came from a
// different variant.
void check_no_extra(const tc::ParamSet<float>& params, const std::vector<tc::CheckpointEntry>& entries,
                    const std::filesystem::path& path) {
  for (const auto& e : entries) {
    if (e.name.starts_with("adam.") || e.name.starts_with("train.")) continue;
    if (!params.contains(e.name)) {
      throw ConfigurationError("checkpoint '" + path.string() + "' holds parameter '" + e.name +
                               "' unknown to the model config");
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigurationError("epochs must be positive");
  if (batch_size == 0) throw ConfigurationError("batch_size must be positive");
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw ConfigurationError("learning_rate must be positive");
  if (!(weight_decay >= 0) || !std::isfinite(weight_decay)) throw ConfigurationError("weight_decay must be non-negative");
  if (eval_threads == 0) throw ConfigurationError("eval_threads must be positive");
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigurationError(e.what());
  }
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"seed", c.seed},
          {"checkpoint_interval", c.checkpoint_interval},
          {"out_dir", c.out_dir.string()},
          {"eval_threads", c.eval_threads},
          {"model", model::to_json(c.model)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  static const char* known[] = {"epochs", "batch_size", "learning_rate", "weight_decay", "seed",
                                "checkpoint_interval", "out_dir", "eval_threads", "model"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigurationError("unknown training option '" + key + "'");
    }
  }
  try {
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("weight_decay")) c.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("checkpoint_interval")) c.checkpoint_interval = j.at("checkpoint_interval").get<std::size_t>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("eval_threads")) c.eval_threads = j.at("eval_threads").get<std::size_t>();
    if (j.contains("model")) c.model = model::model_config_from_json(j.at("model"), c.model);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("bad training config: ") + e.what());
  }
  return c;
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::size_t epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SplitMix64 rng(splitmix64(seed ^ fnv1a64("shuffle")) + epoch);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  return order;
}

std::string metrics_csv(std::span<const EpochMetrics> metrics) {
  std::ostringstream os;
  os << "epoch,train_loss,val_acc,theta\n";
  for (const auto& m : metrics) {
    os << m.epoch << ',' << format_float(m.train_loss) << ',' << format_float(m.val_accuracy) << ','
       << format_float(m.theta) << '\n';
  }
  return os.str();
}

void write_model_config(const std::filesystem::path& path, const model::ModelConfig& config) {
  write_text(path, model::to_json(config).dump(2) + "\n");
}

model::ModelConfig read_model_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigurationError("cannot read model config '" + path.string() + "'");
  try {
    return model::model_config_from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("bad model config '" + path.string() + "': " + e.what());
  }
}

model::AmemModel<float> load_model(const model::ModelConfig& config, const std::filesystem::path& checkpoint) {
  auto params = model::AmemModel<float>::init_params(config, 0);
  const auto entries = tc::load_checkpoint(checkpoint);
  check_no_extra(params, entries, checkpoint);
  try {
    tc::assign_from_entries(params, entries);
  } catch (const tc::CheckpointError& e) {
    throw ConfigurationError("checkpoint '" + checkpoint.string() + "' does not fit the model config: " + e.what());
  }
  return model::AmemModel<float>(config, std::move(params));
}

TrainResult train(const TrainConfig& config, std::span<const EncodedDialog> train_set,
                  std::span<const EncodedDialog> val_set, const std::optional<std::filesystem::path>& resume,
                  const TrainHooks& hooks) {
  config.validate();
  if (train_set.empty()) throw ConfigurationError("empty training set");
  if (val_set.empty()) throw ConfigurationError("empty validation set");
  check_compatible(config.model, train_set);
  check_compatible(config.model, val_set);
  if (config.out_dir.empty()) throw ConfigurationError("out_dir is required");
  std::filesystem::create_directories(config.out_dir);

  auto model = model::AmemModel<float>::init(config.model, config.seed);
  tc::AdamConfig adam_cfg;
  adam_cfg.learning_rate = config.learning_rate;
  adam_cfg.weight_decay = config.weight_decay;
  auto adam = tc::AdamState<float>::init(model.params(), adam_cfg);
  std::vector<EpochMetrics> metrics;
  std::size_t start_epoch = 1;

  if (resume) {
    const auto entries = tc::load_checkpoint(*resume);
    check_no_extra(model.params(), entries, *resume);
    try {
      tc::assign_from_entries(model.params(), entries);
    } catch (const tc::CheckpointError& e) {
      throw ConfigurationError("cannot resume from '" + resume->string() + "': " + e.what());
    }
    std::size_t i = 0;
    for (const auto& p : model.params()) {
      const auto* m = tc::find_entry(entries, kMomentPrefix1 + p.name);
      const auto* v = tc::find_entry(entries, kMomentPrefix2 + p.name);
      if (!m || !v || m->values.size() != p.tensor.size() || v->values.size() != p.tensor.size()) {
        throw ConfigurationError("checkpoint lacks optimizer state for '" + p.name + "'");
      }
      adam.first_moment[i] = m->values;
      adam.second_moment[i] = v->values;
      ++i;
    }
    adam.step = static_cast<std::uint64_t>(entry_scalar(entries, "adam.step"));
    const auto done = static_cast<std::size_t>(entry_scalar(entries, "train.epoch"));
    if (const auto* m = tc::find_entry(entries, "train.metrics")) {
      const std::size_t width = 3 + dialog::kDialogLength;
      for (std::size_t r = 0; r * width < m->values.size(); ++r) {
        EpochMetrics row;
        row.epoch = r + 1;
        row.train_loss = m->values[r * width];
        row.val_accuracy = m->values[r * width + 1];
        row.theta = m->values[r * width + 2];
        for (std::size_t s = 0; s < dialog::kDialogLength; ++s) row.val_step_accuracy[s] = m->values[r * width + 3 + s];
        metrics.push_back(row);
      }
    }
    if (metrics.size() != done) throw ConfigurationError("checkpoint metrics do not match its epoch count");
    start_epoch = done + 1;
  }

  write_model_config(config.out_dir / "model.json", config.model);
  std::filesystem::path last_good;
  auto diverged = [&](const std::string& what) {
    throw DivergenceError(what + (last_good.empty() ? std::string("; no checkpoint written yet")
                                                    : "; last good checkpoint: " + last_good.string()));
  };

  for (std::size_t epoch = start_epoch; epoch <= config.epochs; ++epoch) {
    const auto order = epoch_order(config.seed, epoch, train_set.size());
    double loss_sum = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      model.params().zero_grad();
      for (std::size_t k = begin; k < end; ++k) {
        tc::Graph<float> g;
        std::optional<DialogPass<float>> pass;
        try {
          pass = run_dialog(model, g, train_set[order[k]]);
        } catch (const tc::NumericError& e) {
          diverged("non-finite values at epoch " + std::to_string(epoch) + ", dialog " +
                   std::to_string(order[k]) + " (" + e.what() + ")");
        }
        const float loss = pass->loss.item();
        if (!std::isfinite(loss)) {
          diverged("non-finite loss at epoch " + std::to_string(epoch) + ", dialog " + std::to_string(order[k]));
        }
        loss_sum += loss;
        g.backward(pass->loss);
      }
      const float inv = 1.0f / static_cast<float>(end - begin);
      for (auto& p : model.params()) {
        for (auto& gv : p.tensor.grad()) gv *= inv;
      }
      if (hooks.after_gradient) hooks.after_gradient(model.params());
      tc::adam_step(model.params(), adam);
    }

    EpochMetrics row;
    row.epoch = epoch;
    row.train_loss = static_cast<float>(loss_sum / static_cast<double>(order.size()));
    EvalReport report;
    try {
      report = evaluate(model, val_set, {config.eval_threads});
    } catch (const tc::NumericError& e) {
      diverged("non-finite values in validation after epoch " + std::to_string(epoch) + " (" + e.what() + ")");
    }
    row.val_accuracy = static_cast<float>(report.overall_accuracy);
    row.theta = report.has_theta ? static_cast<float>(report.theta) : std::numeric_limits<float>::quiet_NaN();
    for (std::size_t s = 0; s < dialog::kDialogLength; ++s) row.val_step_accuracy[s] = static_cast<float>(report.step_accuracy[s]);
    metrics.push_back(row);

    write_text(config.out_dir / "metrics.csv", metrics_csv(metrics));
    write_text(config.out_dir / "step_accuracy.json", step_accuracy_json(metrics).dump(2) + "\n");
    if (config.checkpoint_interval > 0 && epoch % config.checkpoint_interval == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04zu.amem", epoch);
      last_good = config.out_dir / name;
      tc::save_checkpoint(last_good, training_entries(model.params(), adam, epoch, metrics));
    }
    if (hooks.on_epoch) hooks.on_epoch(row);
  }

  TrainResult result;
  result.final_checkpoint = config.out_dir / "final.amem";
  tc::save_checkpoint(result.final_checkpoint, training_entries(model.params(), adam, config.epochs, metrics));
  result.params = std::move(model.params());
  result.metrics = std::move(metrics);
  return result;
}

}  // namespace amem::harness
