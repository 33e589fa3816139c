// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/harness/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace amem::harness {

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json beta = nlohmann::json::array();
  for (const auto& row : r.beta_by_distance) beta.push_back(row);
  return {{"overall_accuracy", r.overall_accuracy},
          {"step_accuracy", r.step_accuracy},
          {"loss", r.loss},
          {"theta", r.has_theta ? nlohmann::json(r.theta) : nlohmann::json(nullptr)},
          {"beta_by_distance", std::move(beta)},
          {"dialogs", r.dialogs},
          {"samples", r.samples}};
}

EvalReport summarize(std::span<const DialogOutcome> outcomes) {
  EvalReport r;
  r.dialogs = outcomes.size();
  if (outcomes.empty()) return r;
  std::array<std::size_t, dialog::kDialogLength> correct{};
  std::vector<std::array<double, kMaxDistance>> beta_sum;
  std::size_t beta_dialogs = 0;
  double loss = 0;
  for (const auto& o : outcomes) {
    for (std::size_t s = 0; s < dialog::kDialogLength; ++s) correct[s] += o.predicted[s] == o.truth[s] ? 1 : 0;
    loss += o.loss;
    if (o.beta.empty()) continue;
    if (beta_sum.empty()) beta_sum.assign(o.beta.size(), {});
    ++beta_dialogs;
    for (std::size_t t = 0; t < o.beta.size() && t < beta_sum.size(); ++t) {
      const auto& b = o.beta[t];
      for (std::size_t tau = 0; tau < b.size(); ++tau) {
        const std::size_t distance = t + 1 - tau;
        beta_sum[t][distance - 1] += b[tau];
      }
    }
  }
  const double n = static_cast<double>(outcomes.size());
  double total = 0;
  for (std::size_t s = 0; s < dialog::kDialogLength; ++s) {
    r.step_accuracy[s] = static_cast<double>(correct[s]) / n;
    total += r.step_accuracy[s];
  }
  r.overall_accuracy = total / static_cast<double>(dialog::kDialogLength);
  r.loss = loss / n;
  r.samples = outcomes.size() * dialog::kDialogLength;
  for (auto& row : beta_sum) {
    for (auto& v : row) v /= static_cast<double>(beta_dialogs);
  }
  r.beta_by_distance = std::move(beta_sum);
  return r;
}

EvalReport evaluate_with(std::span<const EncodedDialog> dialogs, const DialogPredictor& predictor,
                         std::size_t threads) {
  std::vector<DialogOutcome> outcomes(dialogs.size());
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(dialogs.size(), 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < dialogs.size(); ++i) outcomes[i] = predictor(i, dialogs[i]);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    const std::size_t chunk = (dialogs.size() + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          const std::size_t end = std::min(dialogs.size(), (w + 1) * chunk);
          for (std::size_t i = w * chunk; i < end; ++i) outcomes[i] = predictor(i, dialogs[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return summarize(outcomes);
}

EvalReport evaluate(const model::AmemModel<float>& model, std::span<const EncodedDialog> dialogs,
                    const EvalOptions& options) {
  check_compatible(model.config(), dialogs);
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(dialogs.size(), 1));
  std::vector<model::AmemModel<float>> workers;
  workers.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) workers.emplace_back(model.config(), model.params().clone());
  const std::size_t chunk = (dialogs.size() + threads - 1) / threads;

  auto predictor = [&](std::size_t i, const EncodedDialog& d) {
    const auto& m = workers[std::min(i / std::max<std::size_t>(chunk, 1), threads - 1)];
    tc::Graph<float> g(/*recording=*/false);
    auto pass = run_dialog(m, g, d, /*collect_beta=*/true);
    DialogOutcome o;
    o.predicted = pass.predicted;
    o.truth = d.answers;
    o.loss = static_cast<double>(pass.loss.item());
    o.beta = std::move(pass.beta);
    return o;
  };
  EvalReport r = evaluate_with(dialogs, predictor, threads);
  if (model.params().contains("mem.theta")) {
    r.has_theta = true;
    r.theta = static_cast<double>(model.params().at("mem.theta")[0]);
  }
  return r;
}

std::size_t threads_from_env() {
  const char* v = std::getenv("AMEM_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigurationError("AMEM_THREADS must be a positive integer, got '" + std::string(v) + "'");
  return static_cast<std::size_t>(n);
}

}  // namespace amem::harness
