// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "amem/model/config.hpp"
#include "amem/model/hashing.hpp"
#include "amem/tensor/ops.hpp"
#include "amem/tensor/params.hpp"

namespace amem::model {

using tc::Graph;
using tc::Tensor;

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// CNN output, one feature column per grid cell (row-major), plus its
// projection into the tentative-attention space (shared by every step).
template <typename T>
struct FeatureGrid {
  Tensor<T> cells;      // [C x N]
  Tensor<T> projected;  // [J x N]
};

/// Ordered (attention map, key) store. Entry 0 is the NULL pair.
template <typename T>
class AttentionMemory {
 public:
  struct Entry {
    Tensor<T> attention;  // [N]
    Tensor<T> key;        // [K]
  };

  AttentionMemory() = default;
  AttentionMemory(Tensor<T> null_attention, Tensor<T> null_key) {
    entries_.push_back({std::move(null_attention), std::move(null_key)});
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  void append(Tensor<T> attention, Tensor<T> key) { entries_.push_back({std::move(attention), std::move(key)}); }

  // Counted accessor used by addressing and retrieval.
  const std::vector<Entry>& read() const {
    ++reads_;
    return entries_;
  }
  std::size_t read_count() const { return reads_; }

 private:
  std::vector<Entry> entries_;
  mutable std::size_t reads_ = 0;
};

template <typename T>
struct DialogState {
  AttentionMemory<T> memory;
  Tensor<T> history_h;  // HRNN state; zeros before the first answered pair
  Tensor<T> history_c;
  std::size_t step = 0;  // index of the next question
};

// Everything computed for a step before the final attention is formed.
template <typename T>
struct StepContext {
  std::size_t step = 0;
  Tensor<T> question;    // RNN(q_t)
  Tensor<T> context;     // c_t
  Tensor<T> tentative;   // alpha^tent
  Tensor<T> beta;        // addressing weights (memory variants)
  Tensor<T> retrieved;   // alpha^mem
  Tensor<T> retrieved_key;  // k^mem (zeros for ATT)
};

template <typename T>
struct StepOutcome {
  Tensor<T> final_attention;  // alpha_t
  Tensor<T> candidates;       // dynamic weight candidates (memory variants)
  Tensor<T> encoding;         // e_t
  Tensor<T> logits;           // [num_answers]
};

template <typename T>
struct StepResult {
  StepContext<T> context;
  StepOutcome<T> outcome;
};

using TokenIds = std::vector<std::size_t>;

/// The attention-memory visual dialog encoder with its answer classifier.
/// Canonical parameter names:
///   cnn.conv{1..S}.weight/.bias   convolution stack
///   qword.embedding, answer.embedding
///   qlstm.weight/.bias            question LSTM
///   hist.qa_fc.weight/.bias, hist.lstm.weight/.bias   (+H)
///   ctx.fc.weight/.bias           context fusion
///   tent.ctx_proj, tent.feat_proj tentative attention projections
///   mem.addr_proj, mem.null_key, mem.theta (+SEQ)
///   comb.conv.weight/.bias, comb.cand.weight/.bias    dynamic combination
///   key.fc.weight/.bias           memory key generation
///   enc.fc.weight/.bias           encoding fusion
///   dec.fc.weight/.bias           answer classifier
template <typename T>
class AmemModel {
 public:
  AmemModel(ModelConfig config, tc::ParamSet<T> params);

  // Xavier-uniform weights, zero biases, forget-gate bias +1, zero NULL key
  // and theta. Each tensor draws from a stream keyed by (seed, name), so
  // variants sharing a component get identical initial values.
  static AmemModel init(const ModelConfig& config, std::uint64_t seed);
  static tc::ParamSet<T> init_params(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  tc::ParamSet<T>& params() { return params_; }
  const tc::ParamSet<T>& params() const { return params_; }
  const HashTables& hash_tables() const { return hash_; }

  FeatureGrid<T> extract_features(Graph<T>& g, const Tensor<T>& image) const;
  Tensor<T> encode_question(Graph<T>& g, std::span<const std::size_t> tokens) const;
  Tensor<T> fuse_qa(Graph<T>& g, const Tensor<T>& question, std::size_t answer) const;
  Tensor<T> encode_history(Graph<T>& g,
                           const std::vector<std::pair<TokenIds, std::size_t>>& history) const;
  Tensor<T> fuse_context(Graph<T>& g, const Tensor<T>& question,
                         const std::optional<Tensor<T>>& history) const;
  Tensor<T> tentative_attention(Graph<T>& g, const Tensor<T>& context,
                                const FeatureGrid<T>& features) const;
  Tensor<T> address_memory(Graph<T>& g, const Tensor<T>& context, const AttentionMemory<T>& memory,
                           std::size_t step) const;
  std::pair<Tensor<T>, Tensor<T>> retrieve(Graph<T>& g, const AttentionMemory<T>& memory,
                                           const Tensor<T>& beta) const;
  Tensor<T> dynamic_candidates(Graph<T>& g, const Tensor<T>& context) const;
  Tensor<T> combine_attentions(Graph<T>& g, const Tensor<T>& tentative, const Tensor<T>& retrieved,
                               const Tensor<T>& candidates) const;
  Tensor<T> attend_features(Graph<T>& g, const Tensor<T>& attention,
                            const FeatureGrid<T>& features) const;
  Tensor<T> fuse_encoding(Graph<T>& g, const Tensor<T>& attended, const Tensor<T>& context,
                          const Tensor<T>& attention, const Tensor<T>& retrieved_key) const;
  Tensor<T> decode_answer(Graph<T>& g, const Tensor<T>& encoding) const;
  Tensor<T> generate_key(Graph<T>& g, const Tensor<T>& context, std::size_t answer) const;

  DialogState<T> begin_dialog() const;

  // c_t, tentative attention and (memory variants) addressing/retrieval.
  StepContext<T> prepare_step(Graph<T>& g, const DialogState<T>& state,
                              const FeatureGrid<T>& features, std::span<const std::size_t> tokens) const;
  // Final attention, encoding and logits from a prepared context.
  StepOutcome<T> finish_step(Graph<T>& g, const StepContext<T>& ctx,
                             const FeatureGrid<T>& features) const;
  // Stores (alpha_t, key) and the QA pair once the step's answer is known.
  void commit_step(Graph<T>& g, DialogState<T>& state, const StepContext<T>& ctx,
                   const StepOutcome<T>& outcome, std::size_t answer) const;

  // prepare + finish + commit with the given (ground-truth) answer.
  StepResult<T> dialog_step(Graph<T>& g, DialogState<T>& state, const FeatureGrid<T>& features,
                            std::span<const std::size_t> tokens, std::size_t answer) const;

  // Re-runs the tail of a step with `replacement` in place of alpha^mem. The
  // replacement must be nonnegative with total mass at most 1. Does not touch
  // the dialog state.
  StepOutcome<T> override_retrieval(Graph<T>& g, const StepContext<T>& ctx,
                                    const FeatureGrid<T>& features,
                                    const Tensor<T>& replacement) const;

 private:
  const Tensor<T>& p(const char* name) const { return params_.at(name); }

  ModelConfig config_;
  tc::ParamSet<T> params_;
  HashTables hash_;
};

extern template class AmemModel<float>;
extern template class AmemModel<double>;

}  // namespace amem::model
