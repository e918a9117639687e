#include <benchmark/benchmark.h>

#include "obj2text/decoder.hpp"
#include "obj2text/encoder.hpp"
#include "obj2text/lstm.hpp"
#include "obj2text/synthetic.hpp"
#include "obj2text/training.hpp"

using namespace obj2text;

namespace {

Model make_model(std::size_t k, std::size_t vocab) {
  ModelConfig c;
  c.hidden = k;
  c.categories = 10;
  c.vocabulary = vocab;
  Model m(c);
  Rng rng(1);
  m.initialize(rng, {});
  return m;
}

}  // namespace

static void BM_LstmStep(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  Model m = make_model(k, 40);
  Matrix s(2 * k, 1, 0.1), x(k, 1, 0.2);
  for (auto _ : state) {
    s = lstm_step(m.encoder().lstm, s, x);
    benchmark::DoNotOptimize(s.data().data());
  }
}
BENCHMARK(BM_LstmStep)->Arg(48)->Arg(128)->Arg(512);

static void BM_BeamSearch(benchmark::State& state) {
  const auto beam = static_cast<std::size_t>(state.range(0));
  Model m = make_model(128, 40);
  const Matrix h(128, 1, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(beam_search(m.decoder(), h, beam, 17));
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(2)->Arg(8);

// One forward/backward/update step on a batch of 16 synthetic captions.
static void BM_TrainIteration(benchmark::State& state) {
  TrainConfig config;
  config.hidden = static_cast<std::size_t>(state.range(0));
  config.min_count = 1;
  const auto raw = generate_synthetic(3, 200);
  const PreparedData data = prepare_data(raw, config);
  Checkpoint ckpt = initial_checkpoint(data, config);
  const auto refs = caption_refs(data.train);
  const std::vector<CaptionRef> batch(refs.begin(), refs.begin() + 16);
  const auto params = ckpt.model.parameters();
  std::size_t t = 0;
  for (auto _ : state) {
    Tape tape;
    tape.backward(record_batch_loss(tape, ckpt.model, batch));
    adam_step(params, config, ++t);
  }
}
BENCHMARK(BM_TrainIteration)->Arg(48)->Arg(128)->Unit(benchmark::kMillisecond);
