#include "obj2text/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "obj2text/errors.hpp"
#include "obj2text/lstm.hpp"

namespace obj2text {

namespace {

std::size_t hidden_size(const DecoderParams& params) { return params.word_embedding.rows(); }

Matrix logits_for(const DecoderParams& params, const Matrix& state) {
  const std::size_t k = hidden_size(params);
  Matrix h(k, 1);
  for (std::size_t j = 0; j < k; ++j) h[j] = state[j];
  return affine(params.output_weights.value, h, params.output_bias.value);
}

void check_word(const DecoderParams& params, TokenId word) {
  if (word >= params.word_embedding.cols()) {
    throw IndexError("decoder: word id " + std::to_string(word) + " out of range (K = " +
                     std::to_string(params.word_embedding.cols()) + ")");
  }
}

bool ranks_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.logprob != b.logprob) return a.logprob > b.logprob;
  return a.tokens < b.tokens;
}

}  // namespace

Matrix init_state(const DecoderParams& params, const Matrix& encoding) {
  return lstm_cell_forward(params.lstm.weights.value, params.lstm.bias.value, encoding,
                           lstm_zero_state(hidden_size(params)));
}

Matrix next_word_log_probs(const DecoderParams& params, const Matrix& state) {
  return log_softmax_column(logits_for(params, state));
}

Matrix consume(const DecoderParams& params, const Matrix& state, TokenId word) {
  check_word(params, word);
  const Matrix& table = params.word_embedding.value;
  Matrix x(table.rows(), 1);
  for (std::size_t r = 0; r < table.rows(); ++r) x[r] = table(r, word);
  return lstm_cell_forward(params.lstm.weights.value, params.lstm.bias.value, x, state);
}

StepResult step(const DecoderParams& params, const Matrix& state, TokenId word) {
  check_word(params, word);
  const Matrix logits = logits_for(params, state);
  Matrix dist = transpose(softmax_rows(transpose(logits)));
  return {std::move(dist), consume(params, state, word)};
}

double prefix_logprob(const DecoderParams& params, const Matrix& encoding,
                      std::span<const TokenId> tokens) {
  Matrix state = consume(params, init_state(params, encoding), Vocabulary::kBos);
  double total = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    check_word(params, tokens[t]);
    total += next_word_log_probs(params, state)[tokens[t]];
    if (t + 1 < tokens.size()) state = consume(params, state, tokens[t]);
  }
  return total;
}

void validate_caption(std::span<const TokenId> caption, std::size_t vocabulary_size) {
  if (caption.size() < 2 || caption.front() != Vocabulary::kBos ||
      caption.back() != Vocabulary::kEos) {
    throw InputError("caption must start with BOS and end with EOS");
  }
  for (std::size_t i = 0; i < caption.size(); ++i) {
    const TokenId id = caption[i];
    if (id >= vocabulary_size) {
      throw IndexError("caption token id " + std::to_string(id) + " out of range (K = " +
                       std::to_string(vocabulary_size) + ")");
    }
    const bool interior = i > 0 && i + 1 < caption.size();
    if (id == Vocabulary::kPad || (interior && (id == Vocabulary::kBos || id == Vocabulary::kEos))) {
      throw InputError("caption contains PAD or an interior BOS/EOS at position " +
                       std::to_string(i));
    }
  }
}

double sequence_logprob(const DecoderParams& params, const Matrix& encoding,
                        std::span<const TokenId> caption) {
  validate_caption(caption, params.word_embedding.cols());
  return prefix_logprob(params, encoding, caption.subspan(1));
}

bool generatable(TokenId word) {
  return word != Vocabulary::kPad && word != Vocabulary::kBos && word != Vocabulary::kUnk;
}

std::vector<TokenId> greedy_decode(const DecoderParams& params, const Matrix& encoding,
                                   std::size_t max_len) {
  if (max_len == 0) throw InputError("greedy_decode: max_len must be >= 1");
  Matrix state = consume(params, init_state(params, encoding), Vocabulary::kBos);
  std::vector<TokenId> out;
  while (out.size() < max_len) {
    const Matrix log_probs = next_word_log_probs(params, state);
    TokenId best = Vocabulary::kEos;
    double best_lp = -std::numeric_limits<double>::infinity();
    for (TokenId w = 0; w < log_probs.size(); ++w) {
      if (!generatable(w)) continue;
      if (log_probs[w] > best_lp) {
        best_lp = log_probs[w];
        best = w;
      }
    }
    out.push_back(best);
    if (best == Vocabulary::kEos) break;
    if (out.size() < max_len) state = consume(params, state, best);
  }
  return out;
}

std::vector<Hypothesis> beam_search(const DecoderParams& params, const Matrix& encoding,
                                    std::size_t beam_size, std::size_t max_len) {
  if (beam_size == 0) throw InputError("beam_search: beam_size must be >= 1");
  if (max_len == 0) throw InputError("beam_search: max_len must be >= 1");

  std::vector<Hypothesis> live(1);
  live[0].state = consume(params, init_state(params, encoding), Vocabulary::kBos);
  std::vector<Hypothesis> pool;

  for (std::size_t length = 1; length <= max_len && !live.empty(); ++length) {
    std::vector<Hypothesis> candidates;
    for (const auto& hyp : live) {
      const Matrix log_probs = next_word_log_probs(params, hyp.state);
      for (TokenId w = 0; w < log_probs.size(); ++w) {
        if (!generatable(w)) continue;
        Hypothesis next;
        next.tokens = hyp.tokens;
        next.tokens.push_back(w);
        next.logprob = hyp.logprob + log_probs[w];
        next.finished = w == Vocabulary::kEos;
        next.state = hyp.state;  // advanced lazily below, only for survivors
        candidates.push_back(std::move(next));
      }
    }
    std::sort(candidates.begin(), candidates.end(), ranks_before);

    std::vector<Hypothesis> next_live;
    for (auto& cand : candidates) {
      if (next_live.size() == beam_size || pool.size() == beam_size) break;
      if (cand.finished) {
        pool.push_back(std::move(cand));
      } else {
        next_live.push_back(std::move(cand));
      }
    }
    if (pool.size() == beam_size) {
      live.clear();
      break;
    }
    if (length < max_len) {
      for (auto& hyp : next_live) hyp.state = consume(params, hyp.state, hyp.tokens.back());
    }
    live = std::move(next_live);
  }

  // Survivors at max_len are forcibly terminated.
  for (auto& hyp : live) pool.push_back(std::move(hyp));
  std::sort(pool.begin(), pool.end(), ranks_before);
  if (pool.size() > beam_size) pool.resize(beam_size);
  return pool;
}

Var sequence_nll(Tape& tape, DecoderParams& params, Var encoding,
                 std::span<const TokenId> caption, double dropout, Rng* rng) {
  validate_caption(caption, params.word_embedding.cols());
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  if (dropout > 0.0 && rng == nullptr) throw ConfigError("dropout needs a random stream");
  const std::size_t k = hidden_size(params);
  const Var table = tape.param(params.word_embedding);
  const Var weights = tape.param(params.lstm.weights);
  const Var bias = tape.param(params.lstm.bias);
  const Var out_weights = tape.param(params.output_weights);
  const Var out_bias = tape.param(params.output_bias);

  Var state = tape.lstm_cell(weights, bias, encoding, tape.constant(lstm_zero_state(k)));
  state = tape.lstm_cell(weights, bias, tape.column(table, Vocabulary::kBos), state);
  std::vector<Var> terms;
  terms.reserve(caption.size() - 1);
  for (std::size_t t = 1; t < caption.size(); ++t) {
    Var hidden = tape.slice_rows(state, 0, k);
    if (dropout > 0.0) {
      Matrix mask(k, 1);
      for (double& m : mask.data()) m = rng->uniform() < dropout ? 0.0 : 1.0 / (1.0 - dropout);
      hidden = tape.mul(hidden, tape.constant(std::move(mask)));
    }
    const Var logits = tape.affine(out_weights, hidden, out_bias);
    terms.push_back(tape.nll(logits, caption[t]));
    if (t + 1 < caption.size()) {
      state = tape.lstm_cell(weights, bias, tape.column(table, caption[t]), state);
    }
  }
  return tape.add_n(terms);
}

}  // namespace obj2text
