// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,2,...] [--desk-dir DIR]
//
// Criteria 6 and 7 need desk-scale training runs. They are read from
// DIR/desk_att and DIR/desk_amem_seq (trained there first if final.amem is
// missing) and evaluated on the test split of DIR/desk_data.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

#include "amem/dialog/dataset.hpp"
#include "amem/dialog/generator.hpp"
#include "amem/dialog/vocab.hpp"
#include "amem/harness/evaluate.hpp"
#include "amem/harness/gradcheck.hpp"
#include "amem/harness/probe.hpp"
#include "amem/harness/train.hpp"
#include "brute_force.hpp"

namespace {

namespace fs = std::filesystem;
using namespace amem;
using model::ModelConfig;
using model::Variant;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool soft = false;  // reported, never fails the run
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

tc::ParamSet<double> perturbed_params(const ModelConfig& c, std::uint64_t seed, double noise) {
  auto ps = model::AmemModel<double>::init_params(c, seed);
  SplitMix64 rng(seed ^ 0x5EEDull);
  for (auto& p : ps) {
    for (auto& v : p.tensor.data()) v += rng.uniform(-noise, noise);
  }
  return ps;
}

bool is_distribution(std::span<const double> v, double& worst) {
  double total = 0;
  bool nonneg = true;
  for (double x : v) {
    nonneg &= x >= 0;
    total += x;
  }
  worst = std::max(worst, std::abs(total - 1));
  return nonneg && std::abs(total - 1) <= 1e-6;
}

std::vector<harness::EncodedDialog> generated(std::size_t images, dialog::Split split, std::uint64_t seed) {
  dialog::DatasetConfig cfg;
  cfg.n_train = cfg.n_val = cfg.n_test = images;
  cfg.base_seed = seed;
  return harness::encode_records(dialog::generate_split(cfg, split));
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::size_t items = 0, agree = 0;
  for (std::uint64_t s = 0; items < 10000; ++s) {
    const auto world = dialog::generate_world(500000 + s);
    const auto d = dialog::generate_dialog(world, dialog::dialog_seed(500000 + s, 0));
    dialog::TargetSet prior;
    for (const auto& item : d.items) {
      agree += testing::brute_force_answer(world, prior, item.ast) == dialog::answer_word(item.answer) ? 1 : 0;
      prior = item.targets;
      ++items;
    }
  }
  const double secs = seconds_since(t0);
  return {agree == items && secs < 60, fmt("%zu/%zu answers agree with brute-force enumeration in %.2f s", agree, items, secs)};
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  const auto r = harness::gradcheck();
  const double secs = seconds_since(t0);
  std::set<std::string> names;
  std::size_t skipped = 0;
  for (const auto& g : r.groups) {
    names.insert(g.name);
    skipped += g.skipped;
  }
  const bool covered = names.count("mem.theta") && names.count("mem.null_key") &&
                       names.size() == harness::tiny_params(harness::tiny_model_config(), 0).size();
  std::string detail = fmt("%zu parameter groups, max rel. error %.3g (tolerance 1e-5), %zu kink-adjacent draws replaced, %.1f s",
                           r.groups.size(), r.max_rel_error, skipped, secs);
  if (!r.failing.empty()) {
    detail += "; failing:";
    for (const auto& f : r.failing) detail += " " + f;
  }
  return {r.passed && covered && r.max_rel_error < 1e-5 && secs < 300, detail};
}

Outcome attention_invariants() {
  const auto dialogs = generated(40, dialog::Split::Test, 91);
  const std::vector<Variant> variants = {Variant::Att, Variant::AttH, Variant::Amem, Variant::AmemH, Variant::AmemSeq, Variant::AmemHSeq};
  std::size_t passes = 0, bad = 0;
  double worst_sum = 0, worst_convex = 0;
  for (std::size_t i = 0; passes < 1000; ++i) {
    const Variant v = variants[i % variants.size()];
    const auto c = ModelConfig::for_variant(v);
    const model::AmemModel<double> m(c, perturbed_params(c, 1000 + i, 0.3));
    const auto& d = dialogs[i % dialogs.size()];
    tc::Graph<double> g(false);
    const auto f = m.extract_features(g, harness::image_tensor<double>(d));
    auto state = m.begin_dialog();
    for (std::size_t t = 0; t < 10; ++t, ++passes) {
      std::vector<std::vector<double>> stored;
      if (c.use_memory) {
        for (const auto& e : state.memory.read()) stored.emplace_back(e.attention.data().begin(), e.attention.data().end());
      }
      const auto r = m.dialog_step(g, state, f, d.questions[t], d.answers[t]);
      bool ok = is_distribution(r.context.tentative.data(), worst_sum) &&
                is_distribution(r.outcome.final_attention.data(), worst_sum);
      if (c.use_memory) {
        ok &= is_distribution(r.context.beta.data(), worst_sum);
        for (std::size_t n = 0; n < 16; ++n) {
          double lo = 1e300, hi = -1e300;
          for (const auto& a : stored) {
            lo = std::min(lo, a[n]);
            hi = std::max(hi, a[n]);
          }
          const double x = r.context.retrieved[n];
          const double out = std::max(lo - x, x - hi);
          worst_convex = std::max(worst_convex, out);
          ok &= out <= 1e-12;
        }
      }
      bad += ok ? 0 : 1;
    }
  }
  return {bad == 0, fmt("%zu forward steps over 6 variants, %zu violations, worst |sum-1| %.2g, worst convex-bound excess %.2g",
                        passes, bad, worst_sum, std::max(0.0, worst_convex))};
}

Outcome sequential_limit() {
  const auto c = ModelConfig::for_variant(Variant::AmemSeq);
  model::AmemModel<double> m(c, perturbed_params(c, 7, 0.3));
  m.params().at("mem.theta")[0] = -100;
  SplitMix64 rng(8);
  double worst = 0;
  const std::size_t trials = 1000;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t len = 2 + rng.uniform_index(10);
    model::AttentionMemory<double> mem(tc::Tensor<double>::zeros({16}), m.params().at("mem.null_key"));
    for (std::size_t i = 1; i < len; ++i) {
      std::vector<double> a(16), k(64);
      double total = 0;
      for (auto& x : a) total += (x = rng.uniform());
      for (auto& x : a) x /= total;
      for (auto& x : k) x = rng.uniform(-1, 1);
      mem.append(tc::Tensor<double>({16}, a), tc::Tensor<double>({64}, k));
    }
    std::vector<double> ctx(64);
    for (auto& x : ctx) x = rng.uniform(-1, 1);
    tc::Graph<double> g(false);
    const auto beta = m.address_memory(g, tc::Tensor<double>({64}, ctx), mem, len - 1);
    for (std::size_t tau = 0; tau < len; ++tau) worst = std::max(worst, std::abs(beta[tau] - (tau == len - 1 ? 1.0 : 0.0)));
  }
  return {worst < 1e-8, fmt("theta = -100 over %zu random memories of 2..11 entries: max |beta - onehot(most recent)| = %.3g", trials, worst)};
}

// An untrained classifier collapses onto a few arbitrary answers and the
// answer marginals are skewed, so one initialisation lands anywhere between
// ~0% and ~11%. Chance is an expectation over initialisations: average seeds.
Outcome chance_sanity() {
  constexpr std::uint64_t kSeeds = 16;
  const auto dialogs = generated(500, dialog::Split::Test, 0);
  std::string detail;
  bool ok = true;
  for (Variant v : model::all_variants()) {
    double total = 0, lo = 1, hi = 0;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      const auto m = model::AmemModel<float>::init(ModelConfig::for_variant(v), seed);
      const double acc = harness::evaluate(m, dialogs, {harness::threads_from_env()}).overall_accuracy;
      total += acc;
      lo = std::min(lo, acc);
      hi = std::max(hi, acc);
    }
    const double mean = total / kSeeds;
    ok &= mean >= 0.01 && mean <= 0.06;
    detail += fmt("%s%s %.2f%% (seeds %.2f..%.2f)", detail.empty() ? "" : ", ", std::string(model::variant_name(v)).c_str(),
                  100 * mean, 100 * lo, 100 * hi);
  }
  return {ok, fmt("mean untrained accuracy over %zu init seeds on 1500 test dialogs (chance 2.63%%, window [1%%, 6%%]): ", kSeeds) + detail};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("amem_accept_det_" + std::to_string(::getpid()));
  fs::remove_all(root);
  dialog::DatasetConfig dc;
  dc.n_train = 30;
  dc.n_val = 5;
  dc.n_test = 5;
  dc.base_seed = 17;
  dialog::generate_dataset(dc, root / "data_a");
  dialog::generate_dataset(dc, root / "data_b");
  std::size_t same_data = 0;
  for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "manifest.json"}) {
    same_data += read_file(root / "data_a" / f) == read_file(root / "data_b" / f) ? 1 : 0;
  }
  const auto splits = harness::load_dataset_dir(root / "data_a");
  const auto train_set = harness::encode_records(splits.train);
  const auto val_set = harness::encode_records(splits.val);
  auto run = [&](const char* name) {
    harness::TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 16;
    tc.seed = 3;
    tc.model = ModelConfig::for_variant(Variant::AmemHSeq);
    tc.model.conv_channels = {8, 8, 16, 16};
    tc.model.hidden_dim = 24;
    tc.out_dir = root / name;
    harness::train(tc, train_set, val_set);
  };
  run("train_a");
  run("train_b");
  std::size_t same_train = 0, files = 0;
  for (const auto& e : fs::directory_iterator(root / "train_a")) {
    ++files;
    same_train += read_file(e.path()) == read_file(root / "train_b" / e.path().filename()) ? 1 : 0;
  }
  fs::remove_all(root);
  return {same_data == 4 && files > 0 && same_train == files,
          fmt("gen-data: %zu/4 files byte-identical; train: %zu/%zu output files byte-identical", same_data, same_train, files)};
}

Outcome probe_identity() {
  const auto dialogs = generated(10, dialog::Split::Test, 23);
  std::size_t checks = 0, identical = 0;
  for (Variant v : {Variant::Amem, Variant::AmemH, Variant::AmemSeq, Variant::AmemHSeq}) {
    const auto c = ModelConfig::for_variant(v);
    const model::AmemModel<float> m(c, perturbed_params(c, 31, 0.3).cast<float>());
    for (const auto& d : dialogs) {
      for (std::size_t t = 0; t < 10; ++t) {
        const auto plain = harness::probe(m, d, t);
        const auto same = harness::probe(m, d, t, plain.retrieved);
        ++checks;
        identical += same.overridden->logits == plain.base.logits &&
                             same.overridden->final_attention == plain.base.final_attention
                         ? 1
                         : 0;
      }
    }
  }
  return {identical == checks, fmt("%zu/%zu probed steps reproduce logits and final attention bit-for-bit", identical, checks)};
}

struct DeskRun {
  harness::EvalReport test;
  float theta = 0;
  std::string origin;
};

DeskRun desk_run(const fs::path& desk, Variant v, const harness::DatasetSplits& data) {
  const auto name = std::string(model::variant_name(v));
  const fs::path dir = desk / ("desk_" + name);
  const auto config = ModelConfig::for_variant(v);
  DeskRun out;
  if (fs::exists(dir / "final.amem")) {
    if (nlohmann::json(model::to_json(harness::read_model_config(dir / "model.json"))) != model::to_json(config)) {
      throw std::runtime_error(dir.string() + " was trained with a different model config");
    }
    out.origin = "existing run";
  } else {
    harness::TrainConfig tc;  // 15 epochs, batch 32, seed 0
    tc.model = config;
    tc.out_dir = dir;
    const auto t0 = Clock::now();
    harness::train(tc, harness::encode_records(data.train), harness::encode_records(data.val));
    out.origin = fmt("trained here in %.1f min", seconds_since(t0) / 60);
  }
  const auto m = harness::load_model(config, dir / "final.amem");
  out.test = harness::evaluate(m, harness::encode_records(data.test), {harness::threads_from_env()});
  out.theta = config.use_seq_preference ? m.params().at("mem.theta")[0] : 0.0f;
  return out;
}

struct DeskResults {
  DeskRun att, seq;
};

DeskResults& desk_results(const fs::path& desk) {
  static std::optional<DeskResults> cached;
  if (!cached) {
    const fs::path data_dir = desk / "desk_data";
    if (!fs::exists(data_dir / "manifest.json")) dialog::generate_dataset(dialog::DatasetConfig{}, data_dir);
    const auto data = harness::load_dataset_dir(data_dir);
    if (data.train.size() != 9000 || data.val.size() != 1500 || data.test.size() != 1500) {
      throw std::runtime_error(data_dir.string() + " is not the 3000/500/500 x 3 desk dataset");
    }
    cached = DeskResults{desk_run(desk, Variant::Att, data), desk_run(desk, Variant::AmemSeq, data)};
  }
  return *cached;
}

Outcome desk_trends(const fs::path& desk) {
  const auto& r = desk_results(desk);
  const auto& a = r.att.test;
  const auto& s = r.seq.test;
  const double gap = s.overall_accuracy - a.overall_accuracy;
  const double att_drop = a.step_accuracy[0] - a.step_accuracy[9];
  const double seq_drop = s.step_accuracy[0] - s.step_accuracy[9];
  const bool ok_a = gap >= 0.08;
  const bool ok_b = att_drop >= 0.08 && seq_drop < att_drop;
  const bool ok_c = a.overall_accuracy > 0.25 && s.overall_accuracy > 0.25;
  return {ok_a && ok_b && ok_c,
          fmt("test accuracy ATT %.2f%% vs AMEM+SEQ %.2f%% (gap %+.2f, need >= 8) [%s]; step1->step10 drop ATT %.2f, "
              "AMEM+SEQ %.2f (need ATT >= 8 and AMEM+SEQ smaller) [%s]; both > 25%% [%s]; runs: %s / %s",
              100 * a.overall_accuracy, 100 * s.overall_accuracy, 100 * gap, ok_a ? "ok" : "no", 100 * att_drop,
              100 * seq_drop, ok_b ? "ok" : "no", ok_c ? "ok" : "no", r.att.origin.c_str(), r.seq.origin.c_str())};
}

Outcome theta_sign(const fs::path& desk) {
  const auto& r = desk_results(desk);
  Outcome o{r.seq.theta < 0, fmt("learned theta after the desk AMEM+SEQ run = %.4f (expected negative)", r.seq.theta)};
  o.soft = true;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amem acceptance suite"};
  std::vector<int> only;
  std::string desk_dir = "desk";
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',')->check(CLI::Range(1, 9));
  app.add_option("--desk-dir", desk_dir, "Directory holding (or receiving) the desk-scale data and runs");
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria = {
      {1, {"oracle equivalence", oracle_equivalence}},
      {2, {"gradient suite", gradient_suite}},
      {3, {"attention invariants", attention_invariants}},
      {4, {"sequential-preference limit", sequential_limit}},
      {5, {"chance sanity", chance_sanity}},
      {6, {"desk-scale trends", [&] { return desk_trends(desk_dir); }}},
      {7, {"theta sign (soft)", [&] { return theta_sign(desk_dir); }}},
      {8, {"determinism", determinism}},
      {9, {"probe identity", probe_identity}},
  };

  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const char* tag = o.pass ? "PASS" : (o.soft ? "WARN" : "FAIL");
    std::printf("criterion %d %s: %s: %s\n", id, tag, entry.first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass && !o.soft) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
