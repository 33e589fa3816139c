// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/model/model.hpp"

#include <cmath>
#include <string>

#include "amem/dialog/vocab.hpp"
#include "amem/util/splitmix.hpp"

namespace amem::model {

namespace ops = amem::tc;

namespace {

std::string conv_name(std::size_t stage, const char* field) {
  return "cnn.conv" + std::to_string(stage + 1) + "." + field;
}

template <typename T>
void add_matrix(tc::ParamSet<T>& ps, const std::string& name, tc::Shape shape, std::size_t fan_in,
                std::size_t fan_out, std::uint64_t seed) {
  Tensor<T> t = Tensor<T>::zeros(std::move(shape));
  SplitMix64 rng(splitmix64(seed ^ fnv1a64(name)));
  tc::xavier_uniform(t, fan_in, fan_out, rng);
  ps.add(name, std::move(t));
}

template <typename T>
void add_zeros(tc::ParamSet<T>& ps, const std::string& name, tc::Shape shape) {
  ps.add(name, Tensor<T>::zeros(std::move(shape)));
}

template <typename T>
void add_lstm(tc::ParamSet<T>& ps, const std::string& prefix, std::size_t input, std::size_t hidden,
              std::uint64_t seed) {
  add_matrix(ps, prefix + ".weight", {4 * hidden, input + hidden}, input + hidden, hidden, seed);
  Tensor<T> b = Tensor<T>::zeros({4 * hidden});
  for (std::size_t i = hidden; i < 2 * hidden; ++i) b[i] = T(1);  // forget gate
  ps.add(prefix + ".bias", std::move(b));
}

}  // namespace

template <typename T>
AmemModel<T>::AmemModel(ModelConfig config, tc::ParamSet<T> params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  const std::size_t n = config_.num_cells();
  if (config_.use_memory) {
    hash_ = HashTables::build(n, config_.comb_conv_channels * n, config_.dpl_candidates);
  }
  // Every expected parameter must be present.
  const auto expected = init_params(config_, 0);
  for (const auto& e : expected) {
    if (!params_.contains(e.name)) throw ValidationError("missing parameter '" + e.name + "'");
    if (params_.at(e.name).shape() != e.tensor.shape()) {
      throw ValidationError("parameter '" + e.name + "' has shape " +
                            tc::shape_str(params_.at(e.name).shape()) + ", expected " +
                            tc::shape_str(e.tensor.shape()));
    }
  }
  if (params_.size() != expected.size()) {
    throw ValidationError("parameter set has " + std::to_string(params_.size()) + " entries, expected " +
                          std::to_string(expected.size()));
  }
}

template <typename T>
tc::ParamSet<T> AmemModel<T>::init_params(const ModelConfig& c, std::uint64_t seed) {
  c.validate();
  tc::ParamSet<T> ps;
  const std::size_t H = c.hidden_dim, W = c.word_dim, K = c.key_dim, J = c.joint_dim;
  const std::size_t C = c.feat_channels(), N = c.num_cells(), E = c.encoding_dim;
  const std::size_t A = c.num_answers, Q = c.question_vocab_size();

  std::size_t in_ch = 3;
  for (std::size_t s = 0; s < c.conv_channels.size(); ++s) {
    const std::size_t out_ch = c.conv_channels[s];
    add_matrix(ps, conv_name(s, "weight"), {out_ch, in_ch, 3, 3}, in_ch * 9, out_ch * 9, seed);
    add_zeros(ps, conv_name(s, "bias"), {out_ch});
    in_ch = out_ch;
  }
  add_matrix(ps, "qword.embedding", {Q, W}, Q, W, seed);
  if (c.use_history || c.use_memory) add_matrix(ps, "answer.embedding", {A, W}, A, W, seed);
  add_lstm(ps, "qlstm", W, H, seed);
  if (c.use_history) {
    add_matrix(ps, "hist.qa_fc.weight", {H, H + W}, H + W, H, seed);
    add_zeros(ps, "hist.qa_fc.bias", {H});
    add_lstm(ps, "hist.lstm", H, H, seed);
  }
  const std::size_t ctx_in = c.use_history ? 2 * H : H;
  add_matrix(ps, "ctx.fc.weight", {H, ctx_in}, ctx_in, H, seed);
  add_zeros(ps, "ctx.fc.bias", {H});
  add_matrix(ps, "tent.ctx_proj", {J, H}, H, J, seed);
  add_matrix(ps, "tent.feat_proj", {J, C}, C, J, seed);
  if (c.use_memory) {
    add_matrix(ps, "mem.addr_proj", {K, H}, H, K, seed);
    add_zeros(ps, "mem.null_key", {K});
    if (c.use_seq_preference) add_zeros(ps, "mem.theta", {1});
    const std::size_t G = c.comb_conv_channels;
    add_matrix(ps, "comb.conv.weight", {G, 2, 3, 3}, 2 * 9, G * 9, seed);
    add_zeros(ps, "comb.conv.bias", {G});
    add_matrix(ps, "comb.cand.weight", {c.dpl_candidates, H}, H, c.dpl_candidates, seed);
    add_zeros(ps, "comb.cand.bias", {c.dpl_candidates});
    add_matrix(ps, "key.fc.weight", {K, H + W}, H + W, K, seed);
    add_zeros(ps, "key.fc.bias", {K});
  }
  const std::size_t enc_in = C + H + N + K;
  add_matrix(ps, "enc.fc.weight", {E, enc_in}, enc_in, E, seed);
  add_zeros(ps, "enc.fc.bias", {E});
  add_matrix(ps, "dec.fc.weight", {A, E}, E, A, seed);
  add_zeros(ps, "dec.fc.bias", {A});
  return ps;
}

template <typename T>
AmemModel<T> AmemModel<T>::init(const ModelConfig& config, std::uint64_t seed) {
  return AmemModel(config, init_params(config, seed));
}

template <typename T>
FeatureGrid<T> AmemModel<T>::extract_features(Graph<T>& g, const Tensor<T>& image) const {
  const std::size_t side = config_.image_side;
  if (image.rank() != 3 || image.dim(0) != 3 || image.dim(1) != side || image.dim(2) != side) {
    throw tc::DimensionError("extract_features: expected image [3x" + std::to_string(side) + "x" +
                             std::to_string(side) + "], got " + tc::shape_str(image.shape()));
  }
  Tensor<T> x = image;
  for (std::size_t s = 0; s < config_.conv_channels.size(); ++s) {
    x = ops::conv2d(g, x, params_.at(conv_name(s, "weight")), params_.at(conv_name(s, "bias")));
    x = ops::relu(g, x);
    x = ops::maxpool2x2(g, x);
  }
  FeatureGrid<T> f;
  f.cells = ops::reshape(g, x, {config_.feat_channels(), config_.num_cells()});
  f.projected = ops::matmul(g, p("tent.feat_proj"), f.cells);
  return f;
}

template <typename T>
Tensor<T> AmemModel<T>::encode_question(Graph<T>& g, std::span<const std::size_t> tokens) const {
  if (tokens.empty()) throw dialog::VocabularyError("encode_question: empty token list");
  const std::size_t H = config_.hidden_dim;
  const std::size_t vocab = config_.question_vocab_size();
  Tensor<T> h = Tensor<T>::zeros({H});
  Tensor<T> c = Tensor<T>::zeros({H});
  for (std::size_t tok : tokens) {
    if (tok >= vocab) {
      throw dialog::VocabularyError("encode_question: token id " + std::to_string(tok) +
                                    " outside vocabulary of " + std::to_string(vocab));
    }
    Tensor<T> x = ops::embedding(g, p("qword.embedding"), tok);
    std::tie(h, c) = ops::lstm_step(g, x, h, c, p("qlstm.weight"), p("qlstm.bias"));
  }
  return h;
}

template <typename T>
Tensor<T> AmemModel<T>::fuse_qa(Graph<T>& g, const Tensor<T>& question, std::size_t answer) const {
  if (answer >= config_.num_answers) {
    throw dialog::VocabularyError("fuse_qa: answer id " + std::to_string(answer) + " out of range");
  }
  Tensor<T> a = ops::embedding(g, p("answer.embedding"), answer);
  return ops::tanh(g, ops::linear(g, p("hist.qa_fc.weight"), ops::concat(g, {question, a}),
                                  p("hist.qa_fc.bias")));
}

template <typename T>
Tensor<T> AmemModel<T>::encode_history(
    Graph<T>& g, const std::vector<std::pair<TokenIds, std::size_t>>& history) const {
  if (!config_.use_history) throw tc::UsageError("encode_history: model has no history encoder");
  const std::size_t H = config_.hidden_dim;
  Tensor<T> h = Tensor<T>::zeros({H});
  Tensor<T> c = Tensor<T>::zeros({H});
  for (const auto& [tokens, answer] : history) {
    Tensor<T> qa = fuse_qa(g, encode_question(g, tokens), answer);
    std::tie(h, c) = ops::lstm_step(g, qa, h, c, p("hist.lstm.weight"), p("hist.lstm.bias"));
  }
  return h;
}

template <typename T>
Tensor<T> AmemModel<T>::fuse_context(Graph<T>& g, const Tensor<T>& question,
                                     const std::optional<Tensor<T>>& history) const {
  if (history.has_value() != config_.use_history) {
    throw tc::UsageError(config_.use_history ? "fuse_context: +H model needs a history encoding"
                                             : "fuse_context: history given to a model without +H");
  }
  Tensor<T> in = history ? ops::concat(g, {question, *history}) : question;
  return ops::tanh(g, ops::linear(g, p("ctx.fc.weight"), in, p("ctx.fc.bias")));
}

template <typename T>
Tensor<T> AmemModel<T>::tentative_attention(Graph<T>& g, const Tensor<T>& context,
                                            const FeatureGrid<T>& features) const {
  Tensor<T> query = ops::matvec(g, p("tent.ctx_proj"), context);
  Tensor<T> scores = ops::matvec_t(g, features.projected, query);
  return ops::softmax(g, scores);
}

template <typename T>
Tensor<T> AmemModel<T>::address_memory(Graph<T>& g, const Tensor<T>& context,
                                       const AttentionMemory<T>& memory, std::size_t step) const {
  const auto& entries = memory.read();
  if (entries.empty()) throw tc::UsageError("address_memory: memory has no NULL entry");
  std::vector<Tensor<T>> keys;
  keys.reserve(entries.size());
  for (const auto& e : entries) keys.push_back(e.key);
  Tensor<T> query = ops::matvec(g, p("mem.addr_proj"), context);
  Tensor<T> scores = ops::matvec(g, ops::stack(g, keys), query);
  if (config_.use_seq_preference) {
    // Relative distance of entry tau from the current question; the NULL
    // entry counts as the oldest.
    std::vector<T> distance(entries.size());
    for (std::size_t tau = 0; tau < entries.size(); ++tau) {
      distance[tau] = static_cast<T>(step + 1 - tau);
    }
    scores = ops::add_scaled(g, scores, p("mem.theta"), std::span<const T>(distance));
  }
  return ops::softmax(g, scores);
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> AmemModel<T>::retrieve(Graph<T>& g, const AttentionMemory<T>& memory,
                                                       const Tensor<T>& beta) const {
  const auto& entries = memory.read();
  if (beta.rank() != 1 || beta.size() != entries.size()) {
    throw tc::DimensionError("retrieve: addressing vector " + tc::shape_str(beta.shape()) +
                             " for memory of " + std::to_string(entries.size()) + " entries");
  }
  std::vector<Tensor<T>> maps, keys;
  for (const auto& e : entries) {
    maps.push_back(e.attention);
    keys.push_back(e.key);
  }
  Tensor<T> alpha = ops::matvec_t(g, ops::stack(g, maps), beta);
  Tensor<T> key = ops::matvec_t(g, ops::stack(g, keys), beta);
  return {alpha, key};
}

template <typename T>
Tensor<T> AmemModel<T>::dynamic_candidates(Graph<T>& g, const Tensor<T>& context) const {
  return ops::linear(g, p("comb.cand.weight"), context, p("comb.cand.bias"));
}

template <typename T>
Tensor<T> AmemModel<T>::combine_attentions(Graph<T>& g, const Tensor<T>& tentative,
                                           const Tensor<T>& retrieved,
                                           const Tensor<T>& candidates) const {
  const std::size_t n = config_.num_cells(), side = config_.grid_side();
  if (tentative.size() != n || retrieved.size() != n) {
    throw tc::DimensionError("combine_attentions: maps must have " + std::to_string(n) + " cells");
  }
  Tensor<T> stacked = ops::reshape(g, ops::concat(g, {tentative, retrieved}), {2, side, side});
  Tensor<T> local = ops::relu(g, ops::conv2d(g, stacked, p("comb.conv.weight"), p("comb.conv.bias")));
  Tensor<T> flat = ops::reshape(g, local, {local.size()});
  Tensor<T> weights = ops::hashed_weights(g, candidates, std::span<const std::uint32_t>(hash_.index),
                                          std::span<const std::int8_t>(hash_.sign), hash_.rows, hash_.cols);
  return ops::softmax(g, ops::matvec(g, weights, flat));
}

template <typename T>
Tensor<T> AmemModel<T>::attend_features(Graph<T>& g, const Tensor<T>& attention,
                                        const FeatureGrid<T>& features) const {
  return ops::matvec(g, features.cells, attention);
}

template <typename T>
Tensor<T> AmemModel<T>::fuse_encoding(Graph<T>& g, const Tensor<T>& attended, const Tensor<T>& context,
                                      const Tensor<T>& attention, const Tensor<T>& retrieved_key) const {
  Tensor<T> in = ops::concat(g, {attended, context, attention, retrieved_key});
  return ops::tanh(g, ops::linear(g, p("enc.fc.weight"), in, p("enc.fc.bias")));
}

template <typename T>
Tensor<T> AmemModel<T>::decode_answer(Graph<T>& g, const Tensor<T>& encoding) const {
  return ops::linear(g, p("dec.fc.weight"), encoding, p("dec.fc.bias"));
}

template <typename T>
Tensor<T> AmemModel<T>::generate_key(Graph<T>& g, const Tensor<T>& context, std::size_t answer) const {
  if (answer >= config_.num_answers) {
    throw dialog::VocabularyError("generate_key: answer id " + std::to_string(answer) + " out of range");
  }
  Tensor<T> a = ops::embedding(g, p("answer.embedding"), answer);
  return ops::tanh(g, ops::linear(g, p("key.fc.weight"), ops::concat(g, {context, a}), p("key.fc.bias")));
}

template <typename T>
DialogState<T> AmemModel<T>::begin_dialog() const {
  DialogState<T> s;
  if (config_.use_memory) {
    s.memory = AttentionMemory<T>(Tensor<T>::zeros({config_.num_cells()}), p("mem.null_key"));
  }
  s.history_h = Tensor<T>::zeros({config_.hidden_dim});
  s.history_c = Tensor<T>::zeros({config_.hidden_dim});
  return s;
}

template <typename T>
StepContext<T> AmemModel<T>::prepare_step(Graph<T>& g, const DialogState<T>& state,
                                          const FeatureGrid<T>& features,
                                          std::span<const std::size_t> tokens) const {
  StepContext<T> ctx;
  ctx.step = state.step;
  ctx.question = encode_question(g, tokens);
  std::optional<Tensor<T>> history;
  if (config_.use_history) history = state.history_h;
  ctx.context = fuse_context(g, ctx.question, history);
  ctx.tentative = tentative_attention(g, ctx.context, features);
  if (config_.use_memory) {
    ctx.beta = address_memory(g, ctx.context, state.memory, state.step);
    std::tie(ctx.retrieved, ctx.retrieved_key) = retrieve(g, state.memory, ctx.beta);
  } else {
    ctx.retrieved_key = Tensor<T>::zeros({config_.key_dim});
  }
  return ctx;
}

template <typename T>
StepOutcome<T> AmemModel<T>::finish_step(Graph<T>& g, const StepContext<T>& ctx,
                                         const FeatureGrid<T>& features) const {
  StepOutcome<T> out;
  if (config_.use_memory) {
    out.candidates = dynamic_candidates(g, ctx.context);
    out.final_attention = combine_attentions(g, ctx.tentative, ctx.retrieved, out.candidates);
  } else {
    out.final_attention = ctx.tentative;
  }
  Tensor<T> attended = attend_features(g, out.final_attention, features);
  out.encoding = fuse_encoding(g, attended, ctx.context, out.final_attention, ctx.retrieved_key);
  out.logits = decode_answer(g, out.encoding);
  return out;
}

template <typename T>
void AmemModel<T>::commit_step(Graph<T>& g, DialogState<T>& state, const StepContext<T>& ctx,
                               const StepOutcome<T>& outcome, std::size_t answer) const {
  if (ctx.step != state.step) throw tc::UsageError("commit_step: context is from a different step");
  if (config_.use_memory) {
    state.memory.append(outcome.final_attention, generate_key(g, ctx.context, answer));
  }
  if (config_.use_history) {
    Tensor<T> qa = fuse_qa(g, ctx.question, answer);
    std::tie(state.history_h, state.history_c) =
        ops::lstm_step(g, qa, state.history_h, state.history_c, p("hist.lstm.weight"), p("hist.lstm.bias"));
  }
  state.step += 1;
}

template <typename T>
StepResult<T> AmemModel<T>::dialog_step(Graph<T>& g, DialogState<T>& state, const FeatureGrid<T>& features,
                                        std::span<const std::size_t> tokens, std::size_t answer) const {
  StepResult<T> r;
  r.context = prepare_step(g, state, features, tokens);
  r.outcome = finish_step(g, r.context, features);
  commit_step(g, state, r.context, r.outcome, answer);
  return r;
}

template <typename T>
StepOutcome<T> AmemModel<T>::override_retrieval(Graph<T>& g, const StepContext<T>& ctx,
                                                const FeatureGrid<T>& features,
                                                const Tensor<T>& replacement) const {
  if (!config_.use_memory) throw ValidationError("override_retrieval: model has no attention memory");
  if (replacement.rank() != 1 || replacement.size() != config_.num_cells()) {
    throw ValidationError("override_retrieval: replacement must have " +
                          std::to_string(config_.num_cells()) + " cells");
  }
  double total = 0;
  for (T v : replacement.data()) {
    if (!(v >= T(0)) || !std::isfinite(static_cast<double>(v))) {
      throw ValidationError("override_retrieval: replacement has a negative or non-finite entry");
    }
    total += static_cast<double>(v);
  }
  // Retrieved maps carry 1 - beta_0 mass, so any sub-distribution is valid.
  if (total > 1.0 + 1e-4) {
    throw ValidationError("override_retrieval: replacement sums to " + std::to_string(total) + " > 1");
  }
  StepContext<T> modified = ctx;
  modified.retrieved = replacement;
  return finish_step(g, modified, features);
}

template class AmemModel<float>;
template class AmemModel<double>;

}  // namespace amem::model
