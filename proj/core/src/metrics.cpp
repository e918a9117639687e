#include "obj2text/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>

#include "obj2text/errors.hpp"

namespace obj2text {

namespace {

using NgramCounts = std::map<std::vector<std::string>, double>;

NgramCounts ngram_counts(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)] += 1.0;
  }
  return counts;
}

void require_pairs(std::span<const EvalPair> pairs, const char* metric) {
  if (pairs.empty()) throw InputError(std::string(metric) + ": no evaluation pairs");
  for (const auto& p : pairs) {
    if (p.references.empty()) throw InputError(std::string(metric) + ": pair without references");
  }
}

}  // namespace

std::vector<double> bleu(std::span<const EvalPair> pairs, std::size_t n_max) {
  require_pairs(pairs, "bleu");
  std::vector<double> matched(n_max, 0.0);
  std::vector<double> total(n_max, 0.0);
  double cand_len = 0.0;
  double ref_len = 0.0;

  for (const auto& pair : pairs) {
    const double c = static_cast<double>(pair.candidate.size());
    cand_len += c;
    double best = std::numeric_limits<double>::infinity();
    double closest = 0.0;
    for (const auto& ref : pair.references) {
      const double r = static_cast<double>(ref.size());
      const double diff = std::abs(r - c);
      if (diff < best || (diff == best && r < closest)) {
        best = diff;
        closest = r;
      }
    }
    ref_len += closest;

    for (std::size_t n = 1; n <= n_max; ++n) {
      const auto cand = ngram_counts(pair.candidate, n);
      NgramCounts max_ref;
      for (const auto& ref : pair.references) {
        for (const auto& [gram, count] : ngram_counts(ref, n)) {
          max_ref[gram] = std::max(max_ref[gram], count);
        }
      }
      for (const auto& [gram, count] : cand) {
        total[n - 1] += count;
        auto it = max_ref.find(gram);
        if (it != max_ref.end()) matched[n - 1] += std::min(count, it->second);
      }
    }
  }

  const double brevity =
      cand_len >= ref_len ? 1.0 : (cand_len == 0.0 ? 0.0 : std::exp(1.0 - ref_len / cand_len));
  std::vector<double> scores(n_max, 0.0);
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < n_max; ++n) {
    if (total[n] == 0.0 || matched[n] == 0.0) zero = true;
    if (!zero) log_sum += std::log(matched[n] / total[n]);
    scores[n] = zero ? 0.0 : brevity * std::exp(log_sum / static_cast<double>(n + 1));
  }
  return scores;
}

double cider(std::span<const EvalPair> pairs) {
  require_pairs(pairs, "cider");
  constexpr std::size_t kMaxN = 4;
  const double log_docs = std::log(static_cast<double>(pairs.size()));

  // Document frequency: number of pairs whose references contain the n-gram.
  std::map<std::vector<std::string>, double> doc_freq;
  for (const auto& pair : pairs) {
    std::set<std::vector<std::string>> seen;
    for (const auto& ref : pair.references)
      for (std::size_t n = 1; n <= kMaxN; ++n)
        for (const auto& [gram, count] : ngram_counts(ref, n)) seen.insert(gram);
    for (const auto& gram : seen) doc_freq[gram] += 1.0;
  }

  auto weights = [&](const NgramCounts& counts) {
    NgramCounts vec;
    for (const auto& [gram, tf] : counts) {
      auto it = doc_freq.find(gram);
      const double df = it == doc_freq.end() ? 0.0 : it->second;
      vec[gram] = tf * (log_docs - std::log(std::max(1.0, df)));
    }
    return vec;
  };
  auto norm = [](const NgramCounts& v) {
    double s = 0.0;
    for (const auto& [gram, x] : v) s += x * x;
    return std::sqrt(s);
  };

  double corpus = 0.0;
  for (const auto& pair : pairs) {
    double score = 0.0;
    std::size_t orders = 0;
    for (std::size_t n = 1; n <= kMaxN; ++n) {
      const auto cand_counts = ngram_counts(pair.candidate, n);
      bool any = !cand_counts.empty();
      for (const auto& ref : pair.references) any = any || ref.size() >= n;
      if (!any) continue;  // no sentence of this pair is n tokens long
      ++orders;
      const auto cand_vec = weights(cand_counts);
      const double cand_norm = norm(cand_vec);
      double per_n = 0.0;
      for (const auto& ref : pair.references) {
        const auto ref_counts = ngram_counts(ref, n);
        if (!ref_counts.empty() && ref_counts == cand_counts) {
          per_n += 1.0;
          continue;
        }
        const auto ref_vec = weights(ref_counts);
        const double ref_norm = norm(ref_vec);
        if (cand_norm == 0.0 || ref_norm == 0.0) continue;
        double dot = 0.0;
        for (const auto& [gram, x] : cand_vec) {
          auto it = ref_vec.find(gram);
          if (it != ref_vec.end()) dot += x * it->second;
        }
        per_n += dot / (cand_norm * ref_norm);
      }
      score += per_n / static_cast<double>(pair.references.size());
    }
    if (orders > 0) corpus += score / static_cast<double>(orders);
  }
  return corpus / static_cast<double>(pairs.size());
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::span<const EvalPair> pairs, double beta) {
  require_pairs(pairs, "rouge_l");
  const double beta2 = beta * beta;
  double total = 0.0;
  for (const auto& pair : pairs) {
    double best = 0.0;
    for (const auto& ref : pair.references) {
      const auto lcs = static_cast<double>(lcs_length(pair.candidate, ref));
      if (lcs == 0.0) continue;
      const double precision = lcs / static_cast<double>(pair.candidate.size());
      const double recall = lcs / static_cast<double>(ref.size());
      best = std::max(best, (1.0 + beta2) * precision * recall / (recall + beta2 * precision));
    }
    total += best;
  }
  return total / static_cast<double>(pairs.size());
}

MetricReport evaluate_metrics(std::span<const EvalPair> pairs) {
  MetricReport report;
  const auto b = bleu(pairs, 4);
  std::copy(b.begin(), b.end(), report.bleu.begin());
  report.cider = cider(pairs);
  report.rouge_l = rouge_l(pairs);
  return report;
}

}  // namespace obj2text
