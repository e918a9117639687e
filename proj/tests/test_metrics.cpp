#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "obj2text/errors.hpp"
#include "obj2text/metrics.hpp"
#include "obj2text/vocabulary.hpp"

using namespace obj2text;

namespace {

EvalPair pair(const std::string& candidate, std::vector<std::string> refs) {
  EvalPair p;
  p.candidate = tokenize(candidate);
  for (const auto& r : refs) p.references.push_back(tokenize(r));
  return p;
}

// Dense brute force: every n-gram of the corpus gets a coordinate, document
// frequency is counted by scanning each pair's references, and cosines are
// taken between explicit vectors.
double brute_force_cider(const std::vector<EvalPair>& pairs) {
  auto grams = [](const Tokens& s, std::size_t n) {
    std::vector<Tokens> out;
    for (std::size_t i = 0; i + n <= s.size(); ++i) out.emplace_back(s.begin() + i, s.begin() + i + n);
    return out;
  };
  const double docs = static_cast<double>(pairs.size());
  double total = 0.0;
  for (const auto& p : pairs) {
    double per_pair = 0.0;
    double orders = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
      bool any = p.candidate.size() >= n;
      for (const auto& r : p.references) any = any || r.size() >= n;
      if (!any) continue;
      orders += 1.0;
      std::vector<Tokens> space;
      auto add = [&](const Tokens& s) {
        for (const auto& g : grams(s, n))
          if (std::find(space.begin(), space.end(), g) == space.end()) space.push_back(g);
      };
      add(p.candidate);
      for (const auto& r : p.references) add(r);

      auto vectorize = [&](const Tokens& s) {
        std::vector<double> v(space.size(), 0.0);
        const auto gs = grams(s, n);
        for (std::size_t i = 0; i < space.size(); ++i) {
          const double tf = static_cast<double>(std::count(gs.begin(), gs.end(), space[i]));
          double df = 0.0;
          for (const auto& q : pairs) {
            bool found = false;
            for (const auto& r : q.references) {
              const auto rg = grams(r, n);
              found = found || std::find(rg.begin(), rg.end(), space[i]) != rg.end();
            }
            df += found ? 1.0 : 0.0;
          }
          v[i] = tf * std::log(docs / std::max(1.0, df));
        }
        return v;
      };
      const auto c = vectorize(p.candidate);
      double per_n = 0.0;
      for (const auto& r : p.references) {
        auto cg = grams(p.candidate, n), rg = grams(r, n);
        std::sort(cg.begin(), cg.end());
        std::sort(rg.begin(), rg.end());
        if (!cg.empty() && cg == rg) {
          per_n += 1.0;
          continue;
        }
        const auto v = vectorize(r);
        double dot = 0.0, cc = 0.0, vv = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
          dot += c[i] * v[i];
          cc += c[i] * c[i];
          vv += v[i] * v[i];
        }
        if (cc > 0.0 && vv > 0.0) per_n += dot / std::sqrt(cc * vv);
      }
      per_pair += per_n / static_cast<double>(p.references.size());
    }
    if (orders > 0.0) total += per_pair / orders;
  }
  return total / docs;
}

}  // namespace

TEST_CASE("bleu: identical candidate scores one at every order") {
  const std::vector<EvalPair> pairs = {pair("a dog to the left of a ball", {"a dog to the left of a ball"})};
  for (double b : bleu(pairs)) CHECK(b == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bleu: clipping with a candidate longer than its reference") {
  // Clipped unigram precision 1/4; the candidate is longer than the
  // reference, so the brevity penalty is 1.
  const std::vector<EvalPair> pairs = {pair("the the the the", {"the cat"})};
  const auto b = bleu(pairs);
  CHECK(std::abs(b[0] - 0.25) < 1e-9);
  CHECK(b[1] == 0.0);
}

TEST_CASE("bleu: brevity penalty for a short candidate") {
  // c = 2, r = 4: BP = exp(1 - 4/2); p1 = 1, p2 = 1.
  const std::vector<EvalPair> pairs = {pair("the cat", {"the cat sat down"})};
  const auto b = bleu(pairs, 2);
  CHECK(std::abs(b[0] - std::exp(-1.0)) < 1e-12);
  CHECK(std::abs(b[1] - std::exp(-1.0)) < 1e-12);
}

TEST_CASE("bleu: closest reference length, shorter on ties") {
  // c = 3; references of length 2 and 4 tie, the shorter one (2) is used.
  const std::vector<EvalPair> pairs = {pair("a b c", {"a b c d", "a b"})};
  CHECK(std::abs(bleu(pairs, 1)[0] - 1.0) < 1e-12);
  // Corpus level: counts are pooled before taking precisions.
  const std::vector<EvalPair> two = {pair("a b", {"a b"}), pair("c d", {"c e"})};
  const auto b = bleu(two, 2);
  CHECK(std::abs(b[0] - 0.75) < 1e-12);
  CHECK(std::abs(b[1] - std::sqrt(0.75 * 0.5)) < 1e-12);
}

TEST_CASE("bleu: no shared 4-gram gives zero BLEU-4") {
  const std::vector<EvalPair> pairs = {pair("a b c d e", {"a b c x d e"})};
  const auto b = bleu(pairs);
  CHECK(b[0] > 0.0);
  CHECK(b[3] == 0.0);
}

TEST_CASE("rouge-l") {
  CHECK(rouge_l(std::vector<EvalPair>{pair("a b c", {"a b c"})}) == doctest::Approx(1.0));
  CHECK(rouge_l(std::vector<EvalPair>{pair("a b c", {"x y"})}) == 0.0);
  const double p = 2.0 / 3.0, beta2 = 1.2 * 1.2;
  const double expected = (1.0 + beta2) * p / (1.0 + beta2 * p);
  CHECK(std::abs(rouge_l(std::vector<EvalPair>{pair("a b c", {"a c"})}) - expected) < 1e-9);
  // Best reference wins.
  CHECK(std::abs(rouge_l(std::vector<EvalPair>{pair("a b c", {"x", "a c"})}) - expected) < 1e-9);
  const std::vector<std::string> a = {"a", "b", "c", "b", "d"}, b = {"b", "d", "c", "b"};
  CHECK(lcs_length(a, b) == 3);
}

TEST_CASE("cider matches a brute-force TF-IDF computation") {
  const std::vector<std::vector<EvalPair>> corpora = {
      {pair("a dog on the left", {"a dog on the left"}), pair("a cat", {"two cats on the right"})},
      {pair("a dog", {"a cat"}), pair("the dog", {"a bird"})},
      {pair("a dog to the left of a ball", {"a dog to the left of a ball", "a dog left of a ball"}),
       pair("two cats above a car", {"two cats below a car", "cats above a car"}),
       pair("a tree", {"a tree on the right"}),
       pair("a bird on top of a tree and a cat", {"a bird on top of a tree"}),
       pair("three boats", {"three boats on the left", "boats"})},
      {pair("x y z", {"x y z"}), pair("x y z", {"x y z"})},
  };
  for (const auto& corpus : corpora) {
    CHECK(std::abs(cider(corpus) - brute_force_cider(corpus)) < 1e-9);
  }
}

TEST_CASE("cider edge cases") {
  const std::vector<EvalPair> identical = {pair("a dog on the left", {"a dog on the left"}),
                                           pair("two cats", {"two cats"})};
  CHECK(std::abs(cider(identical) - 1.0) < 1e-12);
  const std::vector<EvalPair> disjoint = {pair("x y", {"a dog"}), pair("z w", {"a cat"})};
  CHECK(cider(disjoint) == 0.0);
  // Single-document corpus: every IDF vanishes, identical captions still
  // score one.
  CHECK(std::abs(cider(std::vector<EvalPair>{pair("a b", {"a b"})}) - 1.0) < 1e-12);
}

TEST_CASE("identical corpus scores one on every metric") {
  const std::vector<EvalPair> pairs = {pair("a dog to the left of a ball", {"a dog to the left of a ball"}),
                                       pair("two cats on the right", {"two cats on the right"}),
                                       pair("a bird above a car and a tree", {"a bird above a car and a tree"})};
  const MetricReport r = evaluate_metrics(pairs);
  for (double b : r.bleu) CHECK(std::abs(b - 1.0) < 1e-12);
  CHECK(std::abs(r.cider - 1.0) < 1e-12);
  CHECK(std::abs(r.rouge_l - 1.0) < 1e-12);
}

TEST_CASE("metrics ignore reference order and are case-insensitive") {
  const std::vector<EvalPair> a = {pair("A Dog left", {"a dog on the left", "dog left"}),
                                   pair("a cat", {"the cat", "a cat sits"})};
  const std::vector<EvalPair> b = {pair("a dog left", {"dog left", "a dog on the left"}),
                                   pair("a cat", {"a cat sits", "the cat"})};
  const MetricReport ra = evaluate_metrics(a), rb = evaluate_metrics(b);
  for (std::size_t n = 0; n < 4; ++n) CHECK(std::abs(ra.bleu[n] - rb.bleu[n]) < 1e-12);
  CHECK(std::abs(ra.cider - rb.cider) < 1e-12);
  CHECK(std::abs(ra.rouge_l - rb.rouge_l) < 1e-12);
}

TEST_CASE("metrics reject empty input") {
  CHECK_THROWS_AS(bleu(std::vector<EvalPair>{}), InputError);
  CHECK_THROWS_AS(cider(std::vector<EvalPair>{}), InputError);
  EvalPair no_refs;
  no_refs.candidate = {"a"};
  CHECK_THROWS(rouge_l(std::vector<EvalPair>{no_refs}));
}
