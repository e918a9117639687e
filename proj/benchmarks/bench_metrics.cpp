#include <benchmark/benchmark.h>

#include "obj2text/metrics.hpp"
#include "obj2text/synthetic.hpp"
#include "obj2text/vocabulary.hpp"

using namespace obj2text;

static std::vector<EvalPair> corpus(std::size_t n) {
  const auto raw = generate_synthetic(9, n);
  std::vector<EvalPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    // Pair each scene with its neighbour's caption so the scores are not trivial.
    pairs.push_back({tokenize(raw[(i + 1) % n].captions[0]), {tokenize(raw[i].captions[0])}});
  }
  return pairs;
}

static void BM_Bleu(benchmark::State& state) {
  const auto pairs = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bleu(pairs));
}
BENCHMARK(BM_Bleu)->Arg(200)->Arg(2000);

static void BM_Cider(benchmark::State& state) {
  const auto pairs = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cider(pairs));
}
BENCHMARK(BM_Cider)->Arg(200)->Arg(2000);

static void BM_RougeL(benchmark::State& state) {
  const auto pairs = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rouge_l(pairs));
}
BENCHMARK(BM_RougeL)->Arg(200)->Arg(2000);

BENCHMARK_MAIN();
