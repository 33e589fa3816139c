// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "amem/dialog/dataset.hpp"
#include "amem/harness/data.hpp"
#include "amem/model/model.hpp"
#include "amem/tensor/ops.hpp"
#include "amem/util/splitmix.hpp"

namespace {

using namespace amem;
using tc::Tensor;

Tensor<float> random_tensor(tc::Shape shape, std::uint64_t seed, bool requires_grad = false) {
  auto t = Tensor<float>::zeros(std::move(shape), requires_grad);
  SplitMix64 rng(seed);
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

// First layer of the default stack: 3 -> 32 channels on a 64x64 image.
void BM_Conv2dForward(benchmark::State& state) {
  const auto c_in = static_cast<std::size_t>(state.range(0));
  const auto c_out = static_cast<std::size_t>(state.range(1));
  const auto side = static_cast<std::size_t>(state.range(2));
  const auto x = random_tensor({c_in, side, side}, 1);
  const auto w = random_tensor({c_out, c_in, 3, 3}, 2);
  const auto b = random_tensor({c_out}, 3);
  for (auto _ : state) {
    tc::Graph<float> g(false);
    benchmark::DoNotOptimize(tc::conv2d(g, x, w, b).data().data());
  }
}
BENCHMARK(BM_Conv2dForward)->Args({3, 32, 64})->Args({32, 32, 32})->Args({32, 64, 16})->Unit(benchmark::kMicrosecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto x = random_tensor({32, 32, 32}, 1, true);
  const auto w = random_tensor({32, 32, 3, 3}, 2, true);
  const auto b = random_tensor({32}, 3, true);
  for (auto _ : state) {
    tc::Graph<float> g(true);
    const auto y = tc::sum(g, tc::conv2d(g, x, w, b));
    g.backward(y);
    benchmark::DoNotOptimize(w.grad().data());
  }
}
BENCHMARK(BM_Conv2dBackward)->Unit(benchmark::kMicrosecond);

void BM_LstmStep(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const std::size_t in = 32;
  const auto x = random_tensor({in}, 1);
  const auto h = random_tensor({hidden}, 2);
  const auto c = random_tensor({hidden}, 3);
  const auto w = random_tensor({4 * hidden, in + hidden}, 4);
  const auto b = random_tensor({4 * hidden}, 5);
  for (auto _ : state) {
    tc::Graph<float> g(false);
    benchmark::DoNotOptimize(tc::lstm_step(g, x, h, c, w, b).first.data().data());
  }
}
BENCHMARK(BM_LstmStep)->Arg(64)->Arg(128);

// Teacher-forced forward and backward over one ten-step dialog.
void BM_DialogForwardBackward(benchmark::State& state) {
  const auto variant = static_cast<model::Variant>(state.range(0));
  dialog::DatasetConfig cfg;
  cfg.n_train = cfg.n_val = cfg.n_test = 1;
  const auto dialogs = harness::encode_records(dialog::generate_split(cfg, dialog::Split::Train));
  auto m = model::AmemModel<float>::init(model::ModelConfig::for_variant(variant), 0);
  for (auto _ : state) {
    tc::Graph<float> g(true);
    const auto pass = harness::run_dialog(m, g, dialogs.front());
    g.backward(pass.loss);
    for (auto& p : m.params()) p.tensor.zero_grad();
  }
  state.SetLabel(std::string(model::variant_name(variant)));
}
BENCHMARK(BM_DialogForwardBackward)
    ->Arg(static_cast<int>(model::Variant::Att))
    ->Arg(static_cast<int>(model::Variant::AmemSeq))
    ->Arg(static_cast<int>(model::Variant::AmemHSeq))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
