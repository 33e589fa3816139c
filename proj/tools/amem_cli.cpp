// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

// amem: dataset generation, training, evaluation and diagnostics.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "amem/dialog/dataset.hpp"
#include "amem/harness/data.hpp"
#include "amem/harness/evaluate.hpp"
#include "amem/harness/gradcheck.hpp"
#include "amem/harness/probe.hpp"
#include "amem/harness/train.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace amem;

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json load_json_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read config file '" + path + "'");
  try {
    json j = json::parse(is);
    if (!j.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
}

void check_sections(const json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw UsageError("unknown config section '" + key + "'");
    }
  }
}

dialog::DatasetConfig dataset_config_from_json(const json& j) {
  dialog::DatasetConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "train") c.n_train = v.get<std::size_t>();
      else if (key == "val") c.n_val = v.get<std::size_t>();
      else if (key == "test") c.n_test = v.get<std::size_t>();
      else if (key == "dialogs_per_image") c.dialogs_per_image = v.get<std::size_t>();
      else if (key == "seed") c.base_seed = v.get<std::uint64_t>();
      else if (key == "p_count") c.generator.p_count = v.get<double>();
      else if (key == "p_follow_up") c.generator.p_follow_up = v.get<double>();
      else if (key == "p_relation") c.generator.p_relation = v.get<double>();
      else if (key == "max_rejections") c.generator.max_rejections = v.get<std::uint32_t>();
      else throw UsageError("unknown dataset option '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad dataset config: ") + e.what());
  }
  return c;
}

json to_json(const dialog::DatasetConfig& c) {
  return {{"train", c.n_train},
          {"val", c.n_val},
          {"test", c.n_test},
          {"dialogs_per_image", c.dialogs_per_image},
          {"seed", c.base_seed},
          {"p_count", c.generator.p_count},
          {"p_follow_up", c.generator.p_follow_up},
          {"p_relation", c.generator.p_relation},
          {"max_rejections", c.generator.max_rejections}};
}

void validate(const dialog::DatasetConfig& c) {
  if (c.n_train == 0 || c.n_val == 0 || c.n_test == 0 || c.dialogs_per_image == 0) {
    throw UsageError("dataset sizes and dialogs per image must be positive");
  }
  for (double p : {c.generator.p_count, c.generator.p_follow_up, c.generator.p_relation}) {
    if (!(p >= 0 && p <= 1)) throw UsageError("generator probabilities must lie in [0, 1]");
  }
}

model::Variant variant_or_throw(const std::string& name) {
  const auto v = model::parse_variant(name);
  if (!v) throw UsageError("unknown variant '" + name + "' (expected att, att_h, amem, amem_h, amem_seq, amem_h_seq)");
  return *v;
}

// Overwrites the variant flags, keeping any dimension settings.
void apply_variant(model::ModelConfig& c, model::Variant v) {
  const auto flags = model::ModelConfig::for_variant(v);
  c.use_history = flags.use_history;
  c.use_memory = flags.use_memory;
  c.use_seq_preference = flags.use_seq_preference;
}

void echo_config(const std::string& command, const json& effective) {
  std::cerr << "effective config (" << command << "):\n" << effective.dump(2) << '\n';
}

dialog::Split parse_split(const std::string& s) {
  if (s == "train") return dialog::Split::Train;
  if (s == "val") return dialog::Split::Val;
  if (s == "test") return dialog::Split::Test;
  throw UsageError("unknown split '" + s + "' (expected train, val or test)");
}

std::pair<std::size_t, std::size_t> parse_cell(const std::string& s) {
  const auto comma = s.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    const auto r = std::stoul(s.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument(s);
    const auto rest = s.substr(comma + 1);
    const auto c = std::stoul(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(s);
    return {r, c};
  } catch (const std::exception&) {
    throw UsageError("--override-cell expects ROW,COL, got '" + s + "'");
  }
}

// Model config for a checkpoint: explicit file, else model.json beside it.
model::ModelConfig resolve_model_config(const std::string& model_config, const fs::path& checkpoint,
                                        const std::string& variant) {
  fs::path path = model_config.empty() ? checkpoint.parent_path() / "model.json" : fs::path(model_config);
  if (!fs::exists(path)) {
    throw UsageError("no model config: pass --model-config or keep model.json next to the checkpoint");
  }
  auto c = harness::read_model_config(path);
  if (!variant.empty()) apply_variant(c, variant_or_throw(variant));
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

std::vector<harness::EncodedDialog> load_encoded(const fs::path& dir, dialog::Split split) {
  harness::check_manifest(dir);
  const auto records = harness::load_split(dir, split);
  return harness::encode_records(records);
}

void print_report(const harness::EvalReport& r) {
  std::printf("dialogs %zu, questions %zu\n", r.dialogs, r.samples);
  std::printf("overall accuracy %.4f, loss %.4f\n", r.overall_accuracy, r.loss);
  std::printf("per-step accuracy:");
  for (double a : r.step_accuracy) std::printf(" %.4f", a);
  std::printf("\n");
  if (r.has_theta) std::printf("theta %.6f\n", r.theta);
}

struct Options {
  std::string config;
  // gen-data
  std::optional<std::size_t> n_train, n_val, n_test, dialogs_per_image;
  std::optional<std::uint64_t> seed;
  std::optional<double> p_follow_up;
  std::string out;
  // train
  std::string variant, data, resume;
  std::optional<std::size_t> epochs, batch_size, checkpoint_interval;
  std::optional<double> learning_rate;
  // eval / probe / dump-weights
  std::string checkpoint, model_config, split = "test", override_cell;
  bool json_out = false;
  std::size_t dialog_index = 0, step = 0, samples = 1500;
  std::optional<std::size_t> gradcheck_samples;
};

int run_gen_data(const Options& o) {
  json file = load_json_file(o.config);
  check_sections(file, {"dataset", "train", "variant"});
  auto c = dataset_config_from_json(file.value("dataset", json::object()));
  if (o.n_train) c.n_train = *o.n_train;
  if (o.n_val) c.n_val = *o.n_val;
  if (o.n_test) c.n_test = *o.n_test;
  if (o.dialogs_per_image) c.dialogs_per_image = *o.dialogs_per_image;
  if (o.seed) c.base_seed = *o.seed;
  if (o.p_follow_up) c.generator.p_follow_up = *o.p_follow_up;
  validate(c);
  echo_config("gen-data", {{"dataset", to_json(c)}, {"out", o.out}});
  dialog::generate_dataset(c, o.out);
  std::cerr << "wrote " << c.n_train * c.dialogs_per_image << '/' << c.n_val * c.dialogs_per_image << '/'
            << c.n_test * c.dialogs_per_image << " dialogs to " << o.out << '\n';
  return 0;
}

int run_train(const Options& o) {
  json file = load_json_file(o.config);
  check_sections(file, {"dataset", "train", "variant"});
  harness::TrainConfig c;
  try {
    c = harness::train_config_from_json(file.value("train", json::object()));
  } catch (const harness::ConfigurationError& e) {
    throw UsageError(e.what());
  }
  std::string variant = o.variant.empty() ? file.value("variant", std::string()) : o.variant;
  if (variant.empty()) throw UsageError("--variant is required (or \"variant\" in the config file)");
  apply_variant(c.model, variant_or_throw(variant));
  if (o.seed) c.seed = *o.seed;
  if (o.epochs) c.epochs = *o.epochs;
  if (o.batch_size) c.batch_size = *o.batch_size;
  if (o.learning_rate) c.learning_rate = *o.learning_rate;
  if (o.checkpoint_interval) c.checkpoint_interval = *o.checkpoint_interval;
  c.out_dir = o.out;
  c.eval_threads = harness::threads_from_env();
  try {
    c.validate();
  } catch (const harness::ConfigurationError& e) {
    throw UsageError(e.what());
  }
  json effective = {{"variant", variant}, {"data", o.data}, {"train", harness::to_json(c)}};
  if (!o.resume.empty()) effective["resume"] = o.resume;
  echo_config("train", effective);

  const auto splits = harness::load_dataset_dir(o.data);
  const auto train_set = harness::encode_records(splits.train);
  const auto val_set = harness::encode_records(splits.val);
  fs::create_directories(c.out_dir);
  {
    std::ofstream os(c.out_dir / "config.json");
    os << effective.dump(2) << '\n';
  }
  harness::TrainHooks hooks;
  hooks.on_epoch = [](const harness::EpochMetrics& m) {
    std::fprintf(stderr, "epoch %zu: train_loss %.4f val_acc %.4f theta %s\n", m.epoch, static_cast<double>(m.train_loss),
                 static_cast<double>(m.val_accuracy), std::isnan(m.theta) ? "nan" : std::to_string(m.theta).c_str());
  };
  std::optional<fs::path> resume;
  if (!o.resume.empty()) resume = o.resume;
  const auto result = harness::train(c, train_set, val_set, resume, hooks);
  std::cerr << "final checkpoint: " << result.final_checkpoint.string() << '\n';
  return 0;
}

int run_eval(const Options& o) {
  const auto mc = resolve_model_config(o.model_config, o.checkpoint, o.variant);
  const std::size_t threads = harness::threads_from_env();
  echo_config("eval", {{"checkpoint", o.checkpoint}, {"data", o.data}, {"split", o.split}, {"threads", threads},
                       {"model", model::to_json(mc)}});
  const auto dialogs = load_encoded(o.data, parse_split(o.split));
  const auto m = harness::load_model(mc, o.checkpoint);
  const auto report = harness::evaluate(m, dialogs, {threads});
  if (o.json_out) {
    std::cout << harness::to_json(report).dump(2) << '\n';
  } else {
    print_report(report);
  }
  return 0;
}

int run_gradcheck(const Options& o) {
  harness::GradcheckConfig c;
  if (o.seed) c.seed = *o.seed;
  if (o.gradcheck_samples) c.samples_per_group = *o.gradcheck_samples;
  echo_config("gradcheck", {{"seed", c.seed},
                            {"samples_per_group", c.samples_per_group},
                            {"epsilon", c.epsilon},
                            {"tolerance", c.tolerance},
                            {"floor", c.floor},
                            {"smoothness", c.smoothness},
                            {"model", model::to_json(harness::tiny_model_config())}});
  const auto report = harness::gradcheck(c);
  if (o.json_out) {
    std::cout << harness::to_json(report).dump(2) << '\n';
  } else {
    for (const auto& g : report.groups) {
      std::printf("%-20s checked %zu  max rel err %.3e\n", g.name.c_str(), g.checked, g.max_rel_error);
    }
    std::printf("max relative error %.3e (tolerance %.0e): %s\n", report.max_rel_error, report.tolerance,
                report.passed ? "PASS" : "FAIL");
  }
  if (!report.passed) {
    std::string names;
    for (const auto& n : report.failing) names += (names.empty() ? "" : ", ") + n;
    std::cerr << "gradient check failed for: " << names << '\n';
    return kRuntimeFailure;
  }
  return 0;
}

int run_probe(const Options& o) {
  if (o.step >= dialog::kDialogLength) throw UsageError("--step must lie in [0, 10)");
  const auto mc = resolve_model_config(o.model_config, o.checkpoint, o.variant);
  std::optional<std::vector<float>> override_map;
  json effective = {{"checkpoint", o.checkpoint}, {"data", o.data},   {"split", o.split},
                    {"dialog", o.dialog_index},   {"step", o.step},   {"model", model::to_json(mc)}};
  if (!o.override_cell.empty()) {
    const auto [r, c] = parse_cell(o.override_cell);
    if (!mc.use_memory) throw UsageError("--override-cell needs a memory variant");
    if (r >= mc.grid_side() || c >= mc.grid_side()) throw UsageError("--override-cell outside the feature grid");
    override_map = harness::one_hot_cell(mc, r, c);
    effective["override_cell"] = {r, c};
  }
  echo_config("probe", effective);
  const auto dialogs = load_encoded(o.data, parse_split(o.split));
  if (o.dialog_index >= dialogs.size()) {
    throw UsageError("--dialog " + std::to_string(o.dialog_index) + " outside the " + std::to_string(dialogs.size()) +
                     " dialogs of the split");
  }
  const auto m = harness::load_model(mc, o.checkpoint);
  const auto& d = dialogs[o.dialog_index];
  const auto result = harness::probe(m, d, o.step, override_map);
  std::cout << harness::to_json(result, d).dump(o.json_out ? 2 : -1) << '\n';
  return 0;
}

int run_dump_weights(const Options& o) {
  if (o.step >= dialog::kDialogLength) throw UsageError("--step must lie in [0, 10)");
  const auto mc = resolve_model_config(o.model_config, o.checkpoint, o.variant);
  if (!mc.use_memory) throw UsageError("dump-weights needs a memory variant");
  const std::uint64_t seed = o.seed.value_or(0);
  echo_config("dump-weights", {{"checkpoint", o.checkpoint}, {"data", o.data}, {"split", o.split}, {"step", o.step},
                               {"samples", o.samples}, {"seed", seed}, {"out", o.out}, {"model", model::to_json(mc)}});
  const auto dialogs = load_encoded(o.data, parse_split(o.split));
  if (o.samples == 0 || o.samples > dialogs.size()) {
    throw UsageError("--samples must lie in [1, " + std::to_string(dialogs.size()) + "]");
  }
  const auto m = harness::load_model(mc, o.checkpoint);
  harness::dump_dynamic_weights(m, dialogs, o.step, o.samples, seed, o.out);
  std::cerr << "wrote " << o.samples << " rows to " << o.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention-memory visual dialog laboratory"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic dialog dataset");
  gen->add_option("--config", o.config, "JSON config file");
  gen->add_option("--train", o.n_train, "training images");
  gen->add_option("--val", o.n_val, "validation images");
  gen->add_option("--test", o.n_test, "test images");
  gen->add_option("--dialogs-per-image", o.dialogs_per_image, "dialogs per image");
  gen->add_option("--seed", o.seed, "base seed");
  gen->add_option("--p-follow-up", o.p_follow_up, "probability of a history-dependent question");
  gen->add_option("--out", o.out, "output directory")->required();

  auto* train = app.add_subcommand("train", "Train one model variant");
  train->add_option("--config", o.config, "JSON config file");
  train->add_option("--variant", o.variant, "att, att_h, amem, amem_h, amem_seq or amem_h_seq");
  train->add_option("--data", o.data, "dataset directory")->required();
  train->add_option("--out", o.out, "run directory")->required();
  train->add_option("--seed", o.seed, "initialization and shuffling seed");
  train->add_option("--resume", o.resume, "checkpoint to resume from");
  train->add_option("--epochs", o.epochs, "number of epochs");
  train->add_option("--batch-size", o.batch_size, "dialogs per update");
  train->add_option("--lr", o.learning_rate, "Adam learning rate");
  train->add_option("--checkpoint-interval", o.checkpoint_interval, "epochs between checkpoints (0: final only)");

  auto add_model_source = [&](CLI::App* cmd) {
    cmd->add_option("--checkpoint", o.checkpoint, "parameter checkpoint")->required();
    cmd->add_option("--model-config", o.model_config, "model config JSON (default: model.json beside the checkpoint)");
    cmd->add_option("--variant", o.variant, "override the variant flags of the model config");
    cmd->add_option("--data", o.data, "dataset directory")->required();
    cmd->add_option("--split", o.split, "train, val or test")->capture_default_str();
  };

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_model_source(eval);
  eval->add_flag("--json", o.json_out, "print the report as JSON");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every parameter gradient");
  grad->add_option("--seed", o.seed, "parameter and sampling seed");
  grad->add_option("--samples", o.gradcheck_samples, "elements checked per parameter tensor");
  grad->add_flag("--json", o.json_out, "print the report as JSON");

  auto* probe = app.add_subcommand("probe", "Inspect the attention pipeline at one dialog step");
  add_model_source(probe);
  probe->add_option("--dialog", o.dialog_index, "dialog index within the split")->capture_default_str();
  probe->add_option("--step", o.step, "0-based dialog step")->required();
  probe->add_option("--override-cell", o.override_cell, "ROW,COL: replace the retrieved attention by this cell");
  probe->add_flag("--json", o.json_out, "pretty-print the bundle");

  auto* dump = app.add_subcommand("dump-weights", "Write dynamic-weight candidate vectors as CSV");
  add_model_source(dump);
  dump->add_option("--step", o.step, "0-based dialog step")->capture_default_str();
  dump->add_option("--samples", o.samples, "number of dialogs")->capture_default_str();
  dump->add_option("--seed", o.seed, "sampling seed");
  dump->add_option("--out", o.out, "output CSV")->required();
  o.step = 3;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*gen) return run_gen_data(o);
    if (*train) return run_train(o);
    if (*eval) return run_eval(o);
    if (*grad) return run_gradcheck(o);
    if (*probe) return run_probe(o);
    if (*dump) return run_dump_weights(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}
