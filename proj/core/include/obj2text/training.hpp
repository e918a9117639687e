#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "obj2text/dataset.hpp"
#include "obj2text/metrics.hpp"
#include "obj2text/model.hpp"
#include "obj2text/rng.hpp"
#include "obj2text/tape.hpp"
#include "obj2text/vocabulary.hpp"

namespace obj2text {

/// Optimizer, data and model settings for one training run.
///
/// Adam defaults: beta1 = 0.8, beta2 = 0.999, epsilon = 1e-8, with the
/// Neuraltalk2 learning rate of 4e-4.
struct TrainConfig {
  double learning_rate = 4e-4;
  double beta1 = 0.8;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 16;
  std::size_t max_iterations = 1000;
  /// Global gradient-norm clip.
  double grad_clip = 5.0;
  std::uint64_t seed = 0;
  AblationFlags ablation;
  std::size_t hidden = 128;
  /// Validation cadence in iterations; 0 evaluates only at the end.
  std::size_t eval_every = 500;
  std::size_t aux_dim = 0;

  std::size_t min_count = 5;
  std::size_t max_caption_len = 16;
  ObjectOrder object_order = ObjectOrder::Source;
  std::uint64_t order_seed = 0;
  SplitFractions split;
  std::uint64_t split_seed = 0;

  /// 1 means greedy decoding.
  std::size_t eval_beam_size = 1;
  /// Generated tokens per caption, EOS included.
  std::size_t eval_max_len = 17;
  /// Validation examples used for metrics; 0 uses all.
  std::size_t eval_limit = 0;

  /// Dropout on the decoder output layer during training only.
  double dropout = 0.0;

  double init_scale = 0.08;
  double forget_bias = 1.0;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  /// Small model for single-core runs.
  static TrainConfig desk_preset();
  /// GPU-scale schedule (hidden 512, 400k iterations, batch 16). Not used in tests.
  static TrainConfig large_preset();
  static TrainConfig preset(const std::string& name);
};

/// Vocabularies plus the encoded splits of a raw corpus.
struct PreparedData {
  Vocabulary words;
  CategoryVocabulary categories;
  std::vector<CaptionedExample> train;
  std::vector<CaptionedExample> val;
  std::vector<CaptionedExample> test;
};

/// Splits `raw`, builds the word vocabulary from the training captions and
/// the category vocabulary from every example (unless given, e.g. by a
/// checkpoint), and encodes all splits with the configured object order.
/// Aux features are dropped when config.aux_dim is 0 and must have exactly
/// aux_dim entries otherwise.
PreparedData prepare_data(std::span<const RawExample> raw, const TrainConfig& config,
                          const Vocabulary* words = nullptr,
                          const CategoryVocabulary* categories = nullptr);

/// Reorders one layout according to the configured object order. `key`
/// selects the permutation for the shuffled order.
ObjectLayout order_layout(const ObjectLayout& layout, const TrainConfig& config,
                          std::string_view key);

/// One (example, reference) training pair.
struct CaptionRef {
  const CaptionedExample* example = nullptr;
  std::size_t caption = 0;
};

/// Every reference of every example as its own pair.
std::vector<CaptionRef> caption_refs(std::span<const CaptionedExample> examples);

/// Layout encoding h_L of an example, fused with its aux features when the
/// model has a fusion projection.
Matrix encode_example(const Model& model, const CaptionedExample& example);

struct LossValue {
  /// Mean over pairs of the caption negative log-likelihood.
  double loss = 0.0;
  /// Total NLL divided by the number of scored tokens.
  double per_token = 0.0;
  std::size_t tokens = 0;
};

/// Records the mean negative log-likelihood of `batch` on `tape`. Decoder
/// dropout masks, if any, are drawn from `dropout_rng`.
Var record_batch_loss(Tape& tape, Model& model, std::span<const CaptionRef> batch,
                      std::size_t* scored_tokens = nullptr, double dropout = 0.0,
                      Rng* dropout_rng = nullptr);

/// Value-only batch loss.
LossValue batch_loss(const Model& model, std::span<const CaptionRef> batch);
LossValue batch_loss(const Model& model, std::span<const CaptionedExample> examples);

/// Clips the global gradient norm to `max_norm` and returns the norm before
/// clipping. Throws NumericError (iteration, tensor, norm) on a non-finite
/// gradient.
double clip_gradients(std::span<Parameter* const> params, double max_norm,
                      std::size_t iteration = 0);

/// Clipping followed by one bias-corrected Adam update at step t >= 1;
/// gradients are zeroed afterwards.
void adam_step(std::span<Parameter* const> params, const TrainConfig& config, std::size_t t);

/// Everything needed to resume training or serve the model.
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  TrainConfig config;
  Vocabulary words;
  CategoryVocabulary categories;
  Model model;
  std::size_t iteration = 0;
  Rng rng;
};

struct HistoryEntry {
  std::size_t iteration = 0;
  /// Mean training batch loss since the previous entry.
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_per_token = 0.0;
  MetricReport val_metrics;
};

struct TrainResult {
  Checkpoint final_checkpoint;
  /// Highest validation CIDEr seen (the final one when there is no
  /// validation split).
  Checkpoint best_checkpoint;
  std::vector<HistoryEntry> history;
};

using ProgressCallback = std::function<void(const HistoryEntry&)>;

/// Builds a freshly initialized checkpoint for `data`.
Checkpoint initial_checkpoint(const PreparedData& data, const TrainConfig& config);

/// Minimizes the mean caption NLL with Adam over seed-shuffled minibatches
/// until `config.max_iterations`. Starting from `resume` continues its
/// iteration count and reproduces an uninterrupted run bit for bit.
TrainResult train(const PreparedData& data, const TrainConfig& config,
                  const Checkpoint* resume = nullptr, const ProgressCallback& progress = {});
TrainResult train(std::span<const RawExample> raw, const TrainConfig& config);

/// Decodes one example; the returned tokens exclude EOS.
std::vector<TokenId> generate_caption(const Model& model, const CaptionedExample& example,
                                      std::size_t beam_size, std::size_t max_len);

struct EvaluationResult {
  std::vector<std::string> candidates;
  MetricReport metrics;
};

/// Decodes every example and scores the candidates against its references.
EvaluationResult evaluate_model(const Model& model, const Vocabulary& words,
                                std::span<const CaptionedExample> examples,
                                std::size_t beam_size, std::size_t max_len);

/// Scores candidate strings against the examples' reference strings.
MetricReport score_captions(std::span<const std::string> candidates,
                            std::span<const CaptionedExample> examples);

}  // namespace obj2text
