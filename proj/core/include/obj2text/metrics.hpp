#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace obj2text {

using Tokens = std::vector<std::string>;

/// A candidate caption with its reference captions, all already tokenized.
struct EvalPair {
  Tokens candidate;
  std::vector<Tokens> references;
};

struct MetricReport {
  std::array<double, 4> bleu{};  // BLEU-1 .. BLEU-4
  double cider = 0.0;
  double rouge_l = 0.0;
};

/// Corpus BLEU-1..n_max: clipped n-gram counts summed over the corpus,
/// geometric mean of precisions, brevity penalty against the closest
/// reference length (shorter reference on ties). No smoothing: an order
/// with zero matches (or no candidate n-grams) makes that BLEU-n zero.
std::vector<double> bleu(std::span<const EvalPair> pairs, std::size_t n_max = 4);

/// CIDEr on the raw cosine scale: TF-IDF n-gram vectors (n = 1..4) with
/// document frequencies over the references of `pairs`, cosine against each
/// reference averaged over references, then over n, then over the corpus.
/// An order where candidate and reference have the same non-empty counts
/// scores 1 even when every IDF weight vanishes; orders longer than every
/// sentence of a pair are left out of that pair's mean.
double cider(std::span<const EvalPair> pairs);

/// Mean over pairs of the best LCS F-measure (beta = 1.2) across references.
double rouge_l(std::span<const EvalPair> pairs, double beta = 1.2);

/// Length of the longest common subsequence.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

MetricReport evaluate_metrics(std::span<const EvalPair> pairs);

}  // namespace obj2text
