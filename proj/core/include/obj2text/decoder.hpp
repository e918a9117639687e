#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "obj2text/matrix.hpp"
#include "obj2text/model.hpp"
#include "obj2text/rng.hpp"
#include "obj2text/tape.hpp"
#include "obj2text/vocabulary.hpp"

namespace obj2text {

/// Decoder state after feeding the layout encoding as the step-0 input:
/// one LSTM step from the zero state. Returned stacked as [h; c].
Matrix init_state(const DecoderParams& params, const Matrix& encoding);

/// log softmax(W_h * h + b_h) for the hidden part of `state`.
Matrix next_word_log_probs(const DecoderParams& params, const Matrix& state);

/// State after consuming `word` through the word embedding.
Matrix consume(const DecoderParams& params, const Matrix& state, TokenId word);

struct StepResult {
  /// Distribution over the K words computed from the incoming state.
  Matrix distribution;
  Matrix state;
};

/// Predicts from the incoming state, then consumes `word`: the returned
/// distribution is the model's distribution for `word`'s position.
StepResult step(const DecoderParams& params, const Matrix& state, TokenId word);

/// Sum of log p(token) over `tokens`, which follow an implicit BOS. No EOS is
/// required; this scores partial (or forcibly terminated) hypotheses.
double prefix_logprob(const DecoderParams& params, const Matrix& encoding,
                      std::span<const TokenId> tokens);

/// log p(caption | h_L) for a BOS ... EOS caption. BOS is consumed but never
/// scored; EOS is scored. Throws InputError for malformed captions.
double sequence_logprob(const DecoderParams& params, const Matrix& encoding,
                        std::span<const TokenId> caption);

/// Throws InputError unless `caption` is BOS, words..., EOS with no PAD and
/// no interior BOS/EOS, and IndexError if an id is >= vocabulary size.
void validate_caption(std::span<const TokenId> caption, std::size_t vocabulary_size);

/// Whether `word` may be emitted at generation time (PAD, BOS and UNK may not).
bool generatable(TokenId word);

struct Hypothesis {
  /// Generated tokens (BOS excluded); ends with EOS when finished.
  std::vector<TokenId> tokens;
  double logprob = 0.0;
  Matrix state;
  bool finished = false;
};

/// Arg-max decoding; ties go to the lowest word id. Stops after EOS or
/// `max_len` generated tokens (EOS included in the count).
std::vector<TokenId> greedy_decode(const DecoderParams& params, const Matrix& encoding,
                                   std::size_t max_len);

/// Beam search ranked by raw cumulative log-probability. Finished
/// hypotheses move to a completed pool while the live beam refills; the
/// search stops once the pool holds `beam_size` entries or the live
/// hypotheses reach `max_len` tokens. Returns at most `beam_size`
/// hypotheses sorted by logprob (descending), ties by token sequence.
std::vector<Hypothesis> beam_search(const DecoderParams& params, const Matrix& encoding,
                                    std::size_t beam_size, std::size_t max_len);

/// Negative log-likelihood of a BOS ... EOS caption, recorded on `tape`.
/// With `dropout` > 0, each hidden state feeding the output projection is
/// masked (inverted dropout) with draws from `rng`.
Var sequence_nll(Tape& tape, DecoderParams& params, Var encoding,
                 std::span<const TokenId> caption, double dropout = 0.0, Rng* rng = nullptr);

}  // namespace obj2text
