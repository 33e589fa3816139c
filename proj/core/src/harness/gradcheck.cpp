// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/harness/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "amem/dialog/generator.hpp"
#include "amem/dialog/grid_world.hpp"
#include "amem/dialog/vocab.hpp"
#include "amem/util/splitmix.hpp"

namespace amem::harness {

nlohmann::json to_json(const GradcheckReport& r) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"name", g.name},
                      {"checked", g.checked},
                      {"skipped_nonsmooth", g.skipped},
                      {"max_rel_error", g.max_rel_error},
                      {"max_abs_grad", g.max_abs_grad}});
  }
  return {{"passed", r.passed},
          {"max_rel_error", r.max_rel_error},
          {"tolerance", r.tolerance},
          {"failing", r.failing},
          {"groups", std::move(groups)}};
}

model::ModelConfig tiny_model_config() {
  model::ModelConfig c = model::ModelConfig::for_variant(model::Variant::AmemHSeq);
  c.word_dim = 4;
  c.hidden_dim = 6;
  c.key_dim = 5;
  c.joint_dim = 5;
  c.encoding_dim = 7;
  c.dpl_candidates = 16;
  c.comb_conv_channels = 2;
  c.image_side = 32;
  c.conv_channels = {2, 2, 3, 4};
  return c;
}

EncodedDialog tiny_dialog(std::uint64_t seed) {
  const auto world = dialog::generate_world(seed);
  const auto d = dialog::generate_dialog(world, splitmix64(seed));
  EncodedDialog e;
  e.world_id = seed;
  e.image_side = 32;
  SplitMix64 rng(seed ^ fnv1a64("tiny.image"));
  std::vector<float> px(3 * 32 * 32);
  for (auto& v : px) v = static_cast<float>(rng.uniform());
  e.image = std::make_shared<const std::vector<float>>(std::move(px));
  for (std::size_t s = 0; s < dialog::kDialogLength; ++s) {
    for (const auto& w : d.items[s].surface) e.questions[s].push_back(dialog::question_index_or_throw(w));
    e.answers[s] = d.items[s].answer;
    e.kinds[s] = d.items[s].ast.kind;
  }
  return e;
}

tc::ParamSet<double> tiny_params(const model::ModelConfig& config, std::uint64_t seed) {
  auto params = model::AmemModel<double>::init_params(config, seed);
  SplitMix64 rng(seed ^ fnv1a64("tiny.params"));
  for (auto& p : params) {
    const bool vector = p.tensor.rank() == 1;
    for (auto& v : p.tensor.data()) {
      if (p.name.starts_with("cnn.") && vector) {
        v = rng.uniform(0.1, 0.5);  // keeps the 2-channel ReLU stack alive
      } else if (p.name == "mem.theta") {
        v = rng.uniform(-0.6, -0.2);
      } else if (vector) {
        v = rng.uniform(-0.5, 0.5);
      } else {
        v += rng.uniform(-0.1, 0.1);
      }
    }
  }
  return params;
}

GradcheckReport gradcheck(const GradcheckConfig& config) {
  const auto mc = tiny_model_config();
  model::AmemModel<double> m(mc, tiny_params(mc, config.seed));
  const EncodedDialog d = tiny_dialog(config.seed);

  auto loss_at = [&]() {
    tc::Graph<double> g(/*recording=*/false);
    return run_dialog(m, g, d).loss.item();
  };

  m.params().zero_grad();
  {
    tc::Graph<double> g;
    auto pass = run_dialog(m, g, d);
    g.backward(pass.loss);
  }
  if (config.after_backward) config.after_backward(m.params());

  GradcheckReport report;
  report.tolerance = config.tolerance;
  SplitMix64 rng(config.seed ^ fnv1a64("gradcheck.samples"));
  for (auto& p : m.params()) {
    GroupResult gr;
    gr.name = p.name;
    const auto grad = p.tensor.grad();
    // Unused embedding rows and dead units have exactly zero gradient; probe
    // the live elements first and one zero element to confirm it is zero.
    std::vector<std::size_t> live, zero;
    for (std::size_t i = 0; i < grad.size(); ++i) (grad[i] != 0 ? live : zero).push_back(i);
    auto shuffle = [&](std::vector<std::size_t>& v) {
      for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
    };
    shuffle(live);
    shuffle(zero);
    std::vector<std::size_t> picks = live;
    if (!zero.empty()) picks.insert(picks.begin() + static_cast<std::ptrdiff_t>(std::min(live.size(), config.samples_per_group - 1)), zero.front());
    const std::size_t n = picks.size();
    auto rel = [&](double a, double b) {
      return std::abs(a - b) / std::max({std::abs(a), std::abs(b), config.floor});
    };
    for (std::size_t i = 0; i < n && gr.checked < config.samples_per_group; ++i) {
      const std::size_t idx = picks[i];
      double& w = p.tensor.data()[idx];
      const double saved = w;
      auto stencil = [&](double h) {
        auto at = [&](double offset) {
          w = saved + offset;
          return loss_at();
        };
        // Differences first, so a parameter with no effect yields exactly 0.
        const double near = at(h) - at(-h);
        const double far = at(2 * h) - at(-2 * h);
        w = saved;
        return (8 * near - far) / (12 * h);
      };
      const double numeric = stencil(config.epsilon);
      // A ReLU or max-pool switch inside the stencil makes the two step sizes
      // disagree; the loss is not differentiable there, so draw another element.
      if (rel(numeric, stencil(config.epsilon / 4)) > config.smoothness) {
        ++gr.skipped;
        continue;
      }
      const double analytic = grad[idx];
      gr.max_rel_error = std::max(gr.max_rel_error, rel(analytic, numeric));
      gr.max_abs_grad = std::max(gr.max_abs_grad, std::abs(analytic));
      ++gr.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, gr.max_rel_error);
    if (!(gr.max_rel_error < config.tolerance) || gr.checked == 0) report.failing.push_back(gr.name);
    report.groups.push_back(std::move(gr));
  }
  report.passed = report.failing.empty();
  return report;
}

}  // namespace amem::harness
