#include <doctest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "obj2text/baseline.hpp"
#include "obj2text/checkpoint.hpp"
#include "obj2text/errors.hpp"
#include "obj2text/json_io.hpp"
#include "obj2text/synthetic.hpp"
#include "obj2text/training.hpp"

using namespace obj2text;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.hidden = 16;
  c.learning_rate = 1e-2;
  c.min_count = 1;
  c.eval_every = 0;
  c.eval_limit = 4;
  c.split = {1.0, 0.0, 0.0};
  return c;
}

bool same_parameters(const Model& a, const Model& b) {
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i]->name != pb[i]->name || !(pa[i]->value == pb[i]->value) ||
        !(pa[i]->adam_m == pb[i]->adam_m) || !(pa[i]->adam_v == pb[i]->adam_v)) {
      return false;
    }
  }
  return true;
}

RawObject object(const std::string& category, double x = 0.1, double y = 0.1) {
  return {category, {x, y, 0.2, 0.2}};
}

}  // namespace

TEST_CASE("zero-weight model loss is mean caption length times ln K") {
  const auto raw = generate_synthetic(3, 12);
  TrainConfig config = small_config();
  config.init_scale = 0.0;
  config.forget_bias = 0.0;
  const PreparedData data = prepare_data(raw, config);
  Checkpoint ckpt = initial_checkpoint(data, config);
  const double k = static_cast<double>(data.words.size());

  double scored = 0.0;
  for (const auto& ex : data.train) scored += static_cast<double>(ex.captions[0].size() - 1);
  const double expected = scored / static_cast<double>(data.train.size()) * std::log(k);
  const LossValue v = batch_loss(ckpt.model, data.train);
  CHECK(std::abs(v.loss - expected) < 1e-9);
  CHECK(std::abs(v.per_token - std::log(k)) < 1e-12);
}

TEST_CASE("batch loss is a mean, so duplicating the batch leaves it unchanged") {
  const auto raw = generate_synthetic(4, 10);
  const TrainConfig config = small_config();
  const PreparedData data = prepare_data(raw, config);
  const Checkpoint ckpt = initial_checkpoint(data, config);
  const auto refs = caption_refs(data.train);
  std::vector<CaptionRef> doubled = refs;
  doubled.insert(doubled.end(), refs.begin(), refs.end());
  CHECK(std::abs(batch_loss(ckpt.model, refs).loss - batch_loss(ckpt.model, doubled).loss) <
        1e-12);

  Tape tape;
  const Var loss = record_batch_loss(tape, const_cast<Model&>(ckpt.model), refs);
  CHECK(tape.scalar(loss) == batch_loss(ckpt.model, refs).loss);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Parameter p("p", 2, 2);
  p.value.fill(0.3);
  TrainConfig config;
  std::vector<Parameter*> params = {&p};
  adam_step(params, config, 1);
  CHECK(p.value == Matrix(2, 2, 0.3));
}

TEST_CASE("adam: first step with unit gradient moves by lr / (1 + eps)") {
  Parameter p("p", 1, 1);
  p.grad[0] = 1.0;
  TrainConfig config;
  config.learning_rate = 0.01;
  std::vector<Parameter*> params = {&p};
  adam_step(params, config, 1);
  CHECK(std::abs(p.value[0] + 0.01 / (1.0 + 1e-8)) < 1e-15);
  CHECK(p.grad[0] == 0.0);
}

TEST_CASE("gradient clipping rescales to the global norm") {
  Parameter a("a", 1, 1), b("b", 1, 1);
  a.grad[0] = 30.0;
  b.grad[0] = 40.0;
  std::vector<Parameter*> params = {&a, &b};
  CHECK(clip_gradients(params, 5.0) == 50.0);
  CHECK(std::abs(a.grad[0] - 3.0) < 1e-12);
  CHECK(std::abs(b.grad[0] - 4.0) < 1e-12);
}

TEST_CASE("non-finite gradient aborts with diagnostics") {
  Parameter a("decoder.output_bias", 2, 1);
  a.grad[1] = std::nan("");
  std::vector<Parameter*> params = {&a};
  try {
    clip_gradients(params, 5.0, 17);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    const std::string what = e.what();
    CHECK(what.find("17") != std::string::npos);
    CHECK(what.find("decoder.output_bias") != std::string::npos);
    CHECK(what.find("nan") != std::string::npos);
  }
}

TEST_CASE("training lowers the loss on a small corpus") {
  const auto raw = generate_synthetic(5, 16);
  TrainConfig config = small_config();
  config.max_iterations = 500;
  const PreparedData data = prepare_data(raw, config);
  const double before = batch_loss(initial_checkpoint(data, config).model, data.train).loss;
  const TrainResult result = train(data, config);
  const double after = batch_loss(result.final_checkpoint.model, data.train).loss;
  CHECK(after < 0.5 * before);
  REQUIRE(result.history.size() == 1);
  CHECK(result.history[0].iteration == 500);
}

TEST_CASE("training is bitwise deterministic and resumable") {
  const auto raw = generate_synthetic(6, 40);
  TrainConfig config = small_config();
  config.split = {0.8, 0.1, 0.1};
  config.max_iterations = 100;
  config.eval_every = 50;
  const PreparedData data = prepare_data(raw, config);

  const TrainResult a = train(data, config);
  const TrainResult b = train(data, config);
  CHECK(same_parameters(a.final_checkpoint.model, b.final_checkpoint.model));

  TrainConfig half = config;
  half.max_iterations = 37;
  const TrainResult first = train(data, half);
  std::stringstream buffer;
  save_checkpoint(buffer, first.final_checkpoint);
  const Checkpoint restored = load_checkpoint(buffer);
  CHECK(restored.iteration == 37);
  const TrainResult resumed = train(data, config, &restored);
  CHECK(resumed.final_checkpoint.iteration == 100);
  CHECK(same_parameters(resumed.final_checkpoint.model, a.final_checkpoint.model));

  TrainConfig other = config;
  other.seed = 1;
  CHECK(!same_parameters(train(data, other).final_checkpoint.model, a.final_checkpoint.model));

  TrainConfig wider = config;
  wider.hidden = 8;
  CHECK_THROWS_AS(train(data, wider, &restored), ConfigError);
}

TEST_CASE("one example, 2000 iterations at k = 64: greedy decode reproduces its caption") {
  RawExample ex;
  ex.id = "only";
  ex.objects = {object("dog", 0.1, 0.4), object("ball", 0.7, 0.4)};
  ex.captions = {"a dog to the left of a ball"};
  TrainConfig config = small_config();
  config.hidden = 64;
  config.learning_rate = 4e-3;
  config.batch_size = 1;
  config.max_iterations = 2000;
  const std::vector<RawExample> raw = {ex};
  const PreparedData data = prepare_data(raw, config);
  const TrainResult result = train(data, config);
  const auto& example = data.train.at(0);
  auto tokens = generate_caption(result.final_checkpoint.model, example, 1, 17);
  tokens.insert(tokens.begin(), Vocabulary::kBos);
  tokens.push_back(Vocabulary::kEos);
  CHECK(tokens == example.captions[0]);
}

TEST_CASE("50 synthetic examples: training perplexity below 1.5 after 10k iterations") {
  const auto raw = generate_synthetic(7, 50);
  TrainConfig config = small_config();
  config.hidden = 32;
  config.learning_rate = 5e-3;
  config.max_iterations = 10000;
  const PreparedData data = prepare_data(raw, config);
  REQUIRE(data.train.size() == 50);
  const TrainResult result = train(data, config);
  const LossValue v = batch_loss(result.final_checkpoint.model, data.train);
  MESSAGE("per-token perplexity " << std::exp(v.per_token));
  CHECK(std::exp(v.per_token) < 1.5);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  const auto raw = generate_synthetic(8, 20, SyntheticConfig{.aux_dim = kSceneTemplateCount});
  TrainConfig config = small_config();
  config.aux_dim = kSceneTemplateCount;
  config.max_iterations = 20;
  const PreparedData data = prepare_data(raw, config);
  const Checkpoint ckpt = train(data, config).final_checkpoint;

  std::stringstream buffer;
  save_checkpoint(buffer, ckpt);
  const std::string bytes = buffer.str();
  const Checkpoint back = load_checkpoint(buffer);
  CHECK(same_parameters(back.model, ckpt.model));
  CHECK(back.words == ckpt.words);
  CHECK(back.categories == ckpt.categories);
  CHECK(back.iteration == ckpt.iteration);
  CHECK(back.model.config().aux_dim == kSceneTemplateCount);
  nlohmann::json a, b;
  to_json(a, back.config);
  to_json(b, ckpt.config);
  CHECK(a == b);

  std::stringstream again;
  save_checkpoint(again, back);
  CHECK(again.str() == bytes);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::istringstream in1(bad_magic);
  CHECK_THROWS_AS(load_checkpoint(in1), ParseError);

  std::string bad_version = bytes;
  bad_version[8] = static_cast<char>(Checkpoint::kFormatVersion + 1);
  std::istringstream in2(bad_version);
  CHECK_THROWS_AS(load_checkpoint(in2), StateError);

  std::istringstream in3(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_checkpoint(in3), ParseError);
  CHECK_THROWS_AS(load_checkpoint(std::filesystem::path("/nonexistent/x.ckpt")), InputError);
}

TEST_CASE("nearest-neighbour baseline") {
  std::vector<RawExample> raw(3);
  raw[0].id = "0";
  raw[0].objects = {object("dog"), object("dog")};
  raw[0].captions = {"two dogs", "dogs"};
  raw[1].id = "1";
  raw[1].objects = {object("cat")};
  raw[1].captions = {"a cat"};
  raw[2].id = "2";
  raw[2].objects = {object("ball")};
  raw[2].captions = {"a ball"};
  TrainConfig config = small_config();
  const PreparedData data = prepare_data(raw, config);
  const NearestNeighborBaseline nn(data.train, data.categories.size());

  CHECK(nn.caption(data.train[0].layout) == "two dogs");
  CHECK(nn.caption(data.train[2].layout) == "a ball");

  // cat + ball is at distance 1 from both single-object scenes.
  ObjectLayout both;
  both = {{data.categories.id("cat"), {0.1, 0.1, 0.2, 0.2}},
                  {data.categories.id("ball"), {0.1, 0.1, 0.2, 0.2}}};
  CHECK(nn.nearest(both) == 1);

  // A single dog shares nothing with the cat or ball scenes; two dogs is
  // still the closest count vector.
  ObjectLayout dog;
  dog = {{data.categories.id("dog"), {0.1, 0.1, 0.2, 0.2}}};
  CHECK(nn.caption(dog) == "two dogs");

  CHECK_THROWS_AS(NearestNeighborBaseline({}, 3), EmptyInputError);
}

TEST_CASE("train config JSON") {
  const TrainConfig c = parse_train_config(nlohmann::json::parse(
      R"({"preset": "desk", "learning_rate": 0.01, "ablation": {"no_locations": true}})"));
  CHECK(c.hidden == TrainConfig::desk_preset().hidden);
  CHECK(c.learning_rate == 0.01);
  CHECK(c.ablation.no_locations);
  CHECK(!c.ablation.no_counts);

  nlohmann::json j;
  to_json(j, c);
  nlohmann::json k;
  to_json(k, parse_train_config(j));
  CHECK(j == k);

  CHECK_THROWS_AS(parse_train_config(nlohmann::json::parse(R"({"learnig_rate": 1})")), ConfigError);
  CHECK_THROWS_AS(parse_train_config(nlohmann::json::parse(R"({"hidden": "big"})")), ConfigError);
  CHECK_THROWS_AS(parse_train_config(nlohmann::json::parse(R"({"batch_size": 0})")), ConfigError);
  CHECK_THROWS_AS(parse_train_config(nlohmann::json::parse(R"({"preset": "huge"})")), ConfigError);
  CHECK_THROWS_AS(
      parse_train_config(nlohmann::json::parse(R"({"ablation": {"no_counts": true}})")),
      ConfigError);
}
