#include <doctest.h>

#include <cmath>
#include <functional>

#include "obj2text/decoder.hpp"
#include "obj2text/errors.hpp"
#include "reference_model.hpp"

using namespace obj2text;

namespace {

Model random_model(std::uint64_t seed, std::size_t vocab = 9, std::size_t k = 4, double scale = 0.8) {
  ModelConfig c;
  c.hidden = k;
  c.categories = 3;
  c.vocabulary = vocab;
  Model m(c);
  Rng rng(seed);
  m.initialize(rng, {scale, 1.0});
  for (double& v : m.decoder().output_bias.value.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

Matrix random_encoding(Rng& rng, std::size_t k) {
  Matrix h(k, 1);
  for (double& v : h.data()) v = rng.uniform(-1.0, 1.0);
  return h;
}

reference::Vec as_vec(const Matrix& m) { return {m.data().begin(), m.data().end()}; }

}  // namespace

TEST_CASE("zero-weight decoder is uniform") {
  ModelConfig c;
  c.hidden = 3;
  c.categories = 2;
  c.vocabulary = 4;
  Model m(c);
  const Matrix h(3, 1, 0.4);
  CHECK(init_state(m.decoder(), h) == Matrix(6, 1));
  const auto r = step(m.decoder(), init_state(m.decoder(), h), Vocabulary::kBos);
  for (double p : r.distribution.data()) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));

  // Four scored tokens (three words + EOS) under K = 4.
  const std::vector<TokenId> caption = {Vocabulary::kBos, 3, 3, 3, Vocabulary::kEos};
  CHECK(std::abs(sequence_logprob(m.decoder(), h, caption) - 4.0 * std::log(0.25)) < 1e-12);
  CHECK_THROWS_AS(step(m.decoder(), init_state(m.decoder(), h), 4), IndexError);
}

TEST_CASE("step predicts before consuming and sums to one") {
  Model m = random_model(1);
  Rng rng(2);
  const Matrix h = random_encoding(rng, 4);
  const Matrix s0 = init_state(m.decoder(), h);
  const auto r = step(m.decoder(), s0, 5);
  double sum = 0.0;
  for (double p : r.distribution.data()) sum += p;
  CHECK(std::abs(sum - 1.0) < 1e-12);
  const Matrix lp = next_word_log_probs(m.decoder(), s0);
  for (std::size_t i = 0; i < lp.size(); ++i) CHECK(std::abs(std::exp(lp[i]) - r.distribution[i]) < 1e-15);
  CHECK(r.state == consume(m.decoder(), s0, 5));
}

TEST_CASE("sequence_logprob factorizes and matches the reference") {
  Model m = random_model(3);
  Rng rng(4);
  const Matrix h = random_encoding(rng, 4);
  const std::vector<TokenId> caption = {Vocabulary::kBos, 4, 7, 5, Vocabulary::kEos};

  Matrix s = init_state(m.decoder(), h);
  s = consume(m.decoder(), s, Vocabulary::kBos);
  double steps = 0.0;
  for (std::size_t t = 1; t < caption.size(); ++t) {
    const auto r = step(m.decoder(), s, caption[t]);
    steps += std::log(r.distribution[caption[t]]);
    s = r.state;
  }
  const double lp = sequence_logprob(m.decoder(), h, caption);
  CHECK(std::abs(lp - steps) < 1e-12);
  CHECK(std::exp(lp) <= 1.0);
  const std::vector<std::size_t> tokens(caption.begin() + 1, caption.end());
  CHECK(std::abs(lp - reference::score(m, as_vec(h), tokens)) < 1e-12);

  CHECK_THROWS_AS(sequence_logprob(m.decoder(), h, std::vector<TokenId>{4, 5, 2}), InputError);
  CHECK_THROWS_AS(sequence_logprob(m.decoder(), h, std::vector<TokenId>{1, 4, 5}), InputError);
  CHECK_THROWS_AS(sequence_logprob(m.decoder(), h, std::vector<TokenId>{1, 0, 2}), InputError);
  CHECK_THROWS_AS(sequence_logprob(m.decoder(), h, std::vector<TokenId>{1, 2, 5, 2}), InputError);
  CHECK_THROWS_AS(sequence_logprob(m.decoder(), h, std::vector<TokenId>{1, 40, 2}), IndexError);
}

TEST_CASE("greedy decoding") {
  Model m = random_model(5);
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix h = random_encoding(rng, 4);
    const auto one = greedy_decode(m.decoder(), h, 1);
    CHECK(one.size() == 1);
    const auto tokens = greedy_decode(m.decoder(), h, 8);
    CHECK(!tokens.empty());
    CHECK(tokens.size() <= 8);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      CHECK(generatable(tokens[i]));
      if (tokens[i] == Vocabulary::kEos) CHECK(i + 1 == tokens.size());
    }
    // Each greedy token is the arg-max of the reference distribution over
    // generatable words.
    reference::State s = reference::start(m, as_vec(h));
    for (TokenId t : tokens) {
      const auto lp = reference::log_probs(m, s);
      for (std::size_t w = 0; w < lp.size(); ++w) {
        if (generatable(w)) CHECK(lp[w] <= lp[t] + 1e-12);
      }
      s = reference::consume(m, s, t);
    }
  }
}

TEST_CASE("beam search: ordering, consistency and greedy equivalence") {
  Model m = random_model(7);
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix h = random_encoding(rng, 4);
    const auto hyps = beam_search(m.decoder(), h, 3, 6);
    REQUIRE(!hyps.empty());
    CHECK(hyps.size() <= 3);
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      const auto& hyp = hyps[i];
      CHECK(hyp.logprob <= 0.0);
      CHECK(hyp.tokens.size() <= 6);
      if (i > 0) CHECK(hyps[i - 1].logprob >= hyp.logprob);
      CHECK(std::abs(prefix_logprob(m.decoder(), h, hyp.tokens) - hyp.logprob) < 1e-9);
      for (TokenId t : hyp.tokens) CHECK(t != Vocabulary::kPad);
      if (hyp.finished) {
        CHECK(hyp.tokens.back() == Vocabulary::kEos);
        std::vector<TokenId> caption = {Vocabulary::kBos};
        caption.insert(caption.end(), hyp.tokens.begin(), hyp.tokens.end());
        CHECK(std::abs(sequence_logprob(m.decoder(), h, caption) - hyp.logprob) < 1e-9);
      }
    }
    CHECK(beam_search(m.decoder(), h, 1, 6).front().tokens == greedy_decode(m.decoder(), h, 6));
  }
}

TEST_CASE("beam search with a full beam finds the exhaustive optimum") {
  const std::size_t vocab = 6, max_len = 3;
  Model m = random_model(9, vocab, 3, 1.5);
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix h = random_encoding(rng, 3);
    double best = -INFINITY;
    std::vector<std::size_t> prefix;
    std::function<void()> enumerate = [&]() {
      for (std::size_t w = 0; w < vocab; ++w) {
        if (!generatable(w)) continue;
        prefix.push_back(w);
        if (w == Vocabulary::kEos || prefix.size() == max_len) {
          best = std::max(best, reference::score(m, as_vec(h), prefix));
        } else {
          enumerate();
        }
        prefix.pop_back();
      }
    };
    enumerate();
    const std::size_t beam = 216;  // 6^3
    const auto hyps = beam_search(m.decoder(), h, beam, max_len);
    CHECK(std::abs(hyps.front().logprob - best) < 1e-9);
    const auto narrow = beam_search(m.decoder(), h, 2, max_len);
    CHECK(narrow.front().logprob <= best + 1e-12);
  }
}
