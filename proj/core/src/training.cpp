#include "obj2text/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "obj2text/decoder.hpp"
#include "obj2text/encoder.hpp"
#include "obj2text/errors.hpp"

namespace obj2text {

namespace {

/// Stream id of the per-iteration dropout masks; epoch permutations use the
/// small stream ids.
constexpr std::uint64_t kDropoutStream = 0xd1'0b0c'0a75ULL;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

[[noreturn]] void rethrow_with_example(const CaptionedExample& ex, const Error& e) {
  throw InputError("example " + ex.id + ": " + e.what());
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("train config: " + what); };
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) fail("beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) fail("beta2 must lie in (0, 1)");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (!(grad_clip > 0.0)) fail("grad_clip must be positive");
  if (hidden == 0) fail("hidden must be positive");
  if (min_count == 0) fail("min_count must be positive");
  if (max_caption_len == 0) fail("max_caption_len must be positive");
  if (eval_beam_size == 0) fail("eval_beam_size must be positive");
  if (eval_max_len == 0) fail("eval_max_len must be positive");
  if (!(init_scale >= 0.0)) fail("init_scale must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (ablation.no_counts && !ablation.no_locations) {
    fail("no_counts is only supported together with no_locations");
  }
}

TrainConfig TrainConfig::desk_preset() {
  TrainConfig c;
  c.hidden = 48;
  c.learning_rate = 5e-3;
  c.init_scale = 0.2;
  c.max_iterations = 6000;
  c.eval_every = 500;
  return c;
}

TrainConfig TrainConfig::large_preset() {
  TrainConfig c;
  c.hidden = 512;
  c.learning_rate = 4e-4;
  c.max_iterations = 400000;
  c.eval_every = 2500;
  return c;
}

TrainConfig TrainConfig::preset(const std::string& name) {
  if (name == "desk") return desk_preset();
  if (name == "large") return large_preset();
  if (name == "default") return TrainConfig{};
  throw ConfigError("unknown preset '" + name + "' (expected default, desk or large)");
}

ObjectLayout order_layout(const ObjectLayout& layout, const TrainConfig& config,
                          std::string_view key) {
  return apply_object_order(layout, config.object_order, config.order_seed, fnv1a(key));
}

PreparedData prepare_data(std::span<const RawExample> raw, const TrainConfig& config,
                          const Vocabulary* words, const CategoryVocabulary* categories) {
  config.validate();
  if (raw.empty()) throw ConfigError("prepare_data: empty dataset");
  const SplitIndices split = split_indices(raw.size(), config.split, config.split_seed);

  PreparedData data;
  if (words != nullptr) {
    data.words = *words;
  } else {
    std::vector<std::string> captions;
    for (std::size_t i : split.train)
      captions.insert(captions.end(), raw[i].captions.begin(), raw[i].captions.end());
    data.words = build_vocabulary(captions, config.min_count);
  }
  data.categories = categories != nullptr ? *categories : build_category_vocabulary(raw);

  auto encode = [&](const std::vector<std::size_t>& indices) {
    std::vector<CaptionedExample> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
      CaptionedExample ex = encode_example(raw[i], data.words, data.categories,
                                           config.max_caption_len);
      if (ex.layout.empty()) throw InputError("example " + ex.id + " has no objects");
      if (ex.captions.empty()) throw InputError("example " + ex.id + " has no captions");
      if (config.aux_dim == 0) ex.aux_features.clear();
      if (ex.aux_features.size() != config.aux_dim) {
        throw InputError("example " + ex.id + " has " + std::to_string(ex.aux_features.size()) +
                         " aux features, expected " + std::to_string(config.aux_dim));
      }
      ex.layout = order_layout(ex.layout, config, ex.id);
      out.push_back(std::move(ex));
    }
    return out;
  };
  data.train = encode(split.train);
  data.val = encode(split.val);
  data.test = encode(split.test);
  return data;
}

std::vector<CaptionRef> caption_refs(std::span<const CaptionedExample> examples) {
  std::vector<CaptionRef> refs;
  for (const auto& ex : examples)
    for (std::size_t c = 0; c < ex.captions.size(); ++c) refs.push_back({&ex, c});
  return refs;
}

Matrix encode_example(const Model& model, const CaptionedExample& example) {
  const auto& encoder = model.encoder();
  Matrix h = encode_layout(encoder, example.layout, model.config().ablation);
  return fuse_auxiliary(encoder, h, example.aux_features);
}

Var record_batch_loss(Tape& tape, Model& model, std::span<const CaptionRef> batch,
                      std::size_t* scored_tokens, double dropout, Rng* dropout_rng) {
  if (batch.empty()) throw InputError("batch_loss: empty batch");
  std::vector<Var> terms;
  terms.reserve(batch.size());
  std::size_t tokens = 0;
  for (const auto& ref : batch) {
    const CaptionedExample& ex = *ref.example;
    try {
      Var h = encode_layout(tape, model.encoder(), ex.layout, model.config().ablation);
      h = fuse_auxiliary(tape, model.encoder(), h, ex.aux_features);
      const auto& caption = ex.captions.at(ref.caption);
      terms.push_back(sequence_nll(tape, model.decoder(), h, caption, dropout, dropout_rng));
      tokens += caption.size() - 1;
    } catch (const Error& e) {
      rethrow_with_example(ex, e);
    }
  }
  if (scored_tokens != nullptr) *scored_tokens = tokens;
  return tape.scale(tape.add_n(terms), 1.0 / static_cast<double>(batch.size()));
}

LossValue batch_loss(const Model& model, std::span<const CaptionRef> batch) {
  if (batch.empty()) throw InputError("batch_loss: empty batch");
  double total = 0.0;
  LossValue out;
  for (const auto& ref : batch) {
    const CaptionedExample& ex = *ref.example;
    try {
      const Matrix h = encode_example(model, ex);
      const auto& caption = ex.captions.at(ref.caption);
      total += -sequence_logprob(model.decoder(), h, caption);
      out.tokens += caption.size() - 1;
    } catch (const Error& e) {
      rethrow_with_example(ex, e);
    }
  }
  out.loss = total / static_cast<double>(batch.size());
  out.per_token = out.tokens == 0 ? 0.0 : total / static_cast<double>(out.tokens);
  return out;
}

LossValue batch_loss(const Model& model, std::span<const CaptionedExample> examples) {
  const auto refs = caption_refs(examples);
  return batch_loss(model, refs);
}

double clip_gradients(std::span<Parameter* const> params, double max_norm,
                      std::size_t iteration) {
  double sum = 0.0;
  for (const Parameter* p : params) {
    const double sq = frobenius_norm_squared(p->grad);
    if (!std::isfinite(sq)) {
      std::ostringstream os;
      os << "non-finite gradient at iteration " << iteration << " in tensor " << p->name
         << " (squared norm " << sq << ")";
      throw NumericError(os.str());
    }
    sum += sq;
  }
  const double norm = std::sqrt(sum);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (Parameter* p : params) p->grad *= s;
  }
  return norm;
}

void adam_step(std::span<Parameter* const> params, const TrainConfig& config, std::size_t t) {
  if (t == 0) throw ConfigError("adam_step: step counter starts at 1");
  clip_gradients(params, config.grad_clip, t);
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (Parameter* p : params) {
    auto value = p->value.data();
    auto grad = p->grad.data();
    auto m = p->adam_m.data();
    auto v = p->adam_v.data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
    p->zero_grad();
  }
}

Checkpoint initial_checkpoint(const PreparedData& data, const TrainConfig& config) {
  config.validate();
  ModelConfig mc;
  mc.hidden = config.hidden;
  mc.categories = data.categories.size();
  mc.vocabulary = data.words.size();
  mc.aux_dim = config.aux_dim;
  mc.ablation = config.ablation;

  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.words = data.words;
  ckpt.categories = data.categories;
  ckpt.model = Model(mc);
  ckpt.rng = Rng(config.seed);
  ckpt.model.initialize(ckpt.rng, {config.init_scale, config.forget_bias});
  ckpt.iteration = 0;
  return ckpt;
}

namespace {

/// Minibatches drawn from a stream of per-epoch permutations; the batch of
/// iteration t depends only on (seed, t).
class BatchSchedule {
 public:
  BatchSchedule(std::size_t pairs, std::size_t batch_size, std::uint64_t seed)
      : pairs_(pairs), batch_size_(batch_size), seed_(seed) {}

  std::vector<std::size_t> batch(std::size_t iteration) {
    std::vector<std::size_t> out;
    out.reserve(batch_size_);
    const std::size_t start = iteration * batch_size_;
    for (std::size_t pos = start; pos < start + batch_size_; ++pos) {
      const std::size_t epoch = pos / pairs_;
      if (epoch != cached_epoch_ || permutation_.empty()) load_epoch(epoch);
      out.push_back(permutation_[pos % pairs_]);
    }
    return out;
  }

 private:
  void load_epoch(std::size_t epoch) {
    permutation_.resize(pairs_);
    std::iota(permutation_.begin(), permutation_.end(), 0);
    Rng rng = Rng(seed_).fork(epoch);
    rng.shuffle(std::span<std::size_t>(permutation_));
    cached_epoch_ = epoch;
  }

  std::size_t pairs_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::size_t cached_epoch_ = 0;
  std::vector<std::size_t> permutation_;
};

HistoryEntry validate_model(const Model& model, const PreparedData& data,
                            const TrainConfig& config) {
  HistoryEntry entry;
  if (data.val.empty()) return entry;
  const LossValue loss = batch_loss(model, std::span<const CaptionedExample>(data.val));
  entry.val_loss = loss.loss;
  entry.val_per_token = loss.per_token;
  std::span<const CaptionedExample> subset(data.val);
  if (config.eval_limit != 0 && config.eval_limit < subset.size()) {
    subset = subset.first(config.eval_limit);
  }
  entry.val_metrics =
      evaluate_model(model, data.words, subset, config.eval_beam_size, config.eval_max_len)
          .metrics;
  return entry;
}

}  // namespace

TrainResult train(const PreparedData& data, const TrainConfig& config, const Checkpoint* resume,
                  const ProgressCallback& progress) {
  config.validate();
  if (data.train.empty()) throw ConfigError("train: empty training split");

  TrainResult result;
  result.final_checkpoint = resume != nullptr ? *resume : initial_checkpoint(data, config);
  Checkpoint& ckpt = result.final_checkpoint;
  ckpt.config = config;
  if (ckpt.model.config().vocabulary != data.words.size() ||
      ckpt.model.config().categories != data.categories.size() ||
      ckpt.model.config().aux_dim != config.aux_dim ||
      ckpt.model.config().hidden != config.hidden ||
      !(ckpt.model.config().ablation == config.ablation)) {
    throw ConfigError("train: checkpoint does not match the data and configuration");
  }

  const auto pairs = caption_refs(data.train);
  BatchSchedule schedule(pairs.size(), config.batch_size, config.seed);
  const auto params = ckpt.model.parameters();

  double best_cider = -1.0;
  bool have_best = false;
  double running = 0.0;
  std::size_t running_count = 0;
  std::vector<CaptionRef> batch(config.batch_size);

  for (std::size_t it = ckpt.iteration; it < config.max_iterations; ++it) {
    const auto indices = schedule.batch(it);
    for (std::size_t b = 0; b < indices.size(); ++b) batch[b] = pairs[indices[b]];

    Tape tape;
    Rng dropout_rng = Rng(config.seed).fork(kDropoutStream).fork(it);
    const Var loss = record_batch_loss(tape, ckpt.model, batch, nullptr, config.dropout, &dropout_rng);
    running += tape.scalar(loss);
    ++running_count;
    tape.backward(loss);
    adam_step(params, config, it + 1);
    ckpt.iteration = it + 1;

    const bool last = ckpt.iteration == config.max_iterations;
    const bool due = config.eval_every != 0 && ckpt.iteration % config.eval_every == 0;
    if (due || last) {
      HistoryEntry entry = validate_model(ckpt.model, data, config);
      entry.iteration = ckpt.iteration;
      entry.train_loss = running / static_cast<double>(running_count);
      running = 0.0;
      running_count = 0;
      result.history.push_back(entry);
      if (progress) progress(entry);
      if (!data.val.empty() && entry.val_metrics.cider > best_cider) {
        best_cider = entry.val_metrics.cider;
        result.best_checkpoint = ckpt;
        have_best = true;
      }
    }
  }
  if (!have_best) result.best_checkpoint = ckpt;
  return result;
}

TrainResult train(std::span<const RawExample> raw, const TrainConfig& config) {
  return train(prepare_data(raw, config), config);
}

std::vector<TokenId> generate_caption(const Model& model, const CaptionedExample& example,
                                      std::size_t beam_size, std::size_t max_len) {
  const Matrix h = encode_example(model, example);
  std::vector<TokenId> tokens;
  if (beam_size <= 1) {
    tokens = greedy_decode(model.decoder(), h, max_len);
  } else {
    tokens = beam_search(model.decoder(), h, beam_size, max_len).front().tokens;
  }
  if (!tokens.empty() && tokens.back() == Vocabulary::kEos) tokens.pop_back();
  return tokens;
}

MetricReport score_captions(std::span<const std::string> candidates,
                            std::span<const CaptionedExample> examples) {
  if (candidates.size() != examples.size()) {
    throw InputError("score_captions: " + std::to_string(candidates.size()) +
                     " candidates for " + std::to_string(examples.size()) + " examples");
  }
  std::vector<EvalPair> pairs;
  pairs.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    EvalPair pair;
    pair.candidate = tokenize(candidates[i]);
    for (const auto& ref : examples[i].references) pair.references.push_back(tokenize(ref));
    pairs.push_back(std::move(pair));
  }
  return evaluate_metrics(pairs);
}

EvaluationResult evaluate_model(const Model& model, const Vocabulary& words,
                                std::span<const CaptionedExample> examples,
                                std::size_t beam_size, std::size_t max_len) {
  EvaluationResult out;
  out.candidates.reserve(examples.size());
  for (const auto& ex : examples) {
    out.candidates.push_back(detokenize(generate_caption(model, ex, beam_size, max_len), words));
  }
  if (!examples.empty()) out.metrics = score_captions(out.candidates, examples);
  return out;
}

}  // namespace obj2text
