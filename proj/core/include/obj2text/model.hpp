#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "obj2text/parameter.hpp"
#include "obj2text/rng.hpp"

namespace obj2text {

/// Lesioned encoder variants.
struct AblationFlags {
  /// Drop the box term; the encoder sees category embeddings only.
  bool no_locations = false;
  /// Keep only the first object of each category. Only meaningful together
  /// with no_locations.
  bool no_counts = false;

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

std::string describe(const AblationFlags& flags);

struct ModelConfig {
  /// Shared embedding / hidden size k.
  std::size_t hidden = 128;
  /// Number of object categories V.
  std::size_t categories = 0;
  /// Word vocabulary size K, reserved tokens included.
  std::size_t vocabulary = 0;
  /// Auxiliary feature width; 0 disables the fusion projection.
  std::size_t aux_dim = 0;
  AblationFlags ablation;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LstmParams {
  Parameter weights;  // (4k x (input + k)), gate rows [i; f; o; g]
  Parameter bias;     // (4k x 1)
};

struct EncoderParams {
  Parameter category_embedding;  // (k x V)
  Parameter location_weights;    // (k x 4)
  Parameter location_bias;       // (k x 1)
  LstmParams lstm;               // input k, hidden k
  Parameter fusion_weights;      // (k x aux_dim), empty when aux_dim == 0
  Parameter fusion_bias;         // (k x 1), empty when aux_dim == 0
};

struct DecoderParams {
  Parameter word_embedding;  // (k x K)
  LstmParams lstm;           // input k, hidden k
  Parameter output_weights;  // (K x k)
  Parameter output_bias;     // (K x 1)
};

struct InitOptions {
  /// Weights are drawn from uniform(-scale, scale); biases start at zero.
  double scale = 0.08;
  double forget_bias = 1.0;
};

/// Encoder + decoder parameters for one configuration.
class Model {
 public:
  Model() = default;
  /// All tensors zero-initialized with the configured shapes.
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  EncoderParams& encoder() { return encoder_; }
  const EncoderParams& encoder() const { return encoder_; }
  DecoderParams& decoder() { return decoder_; }
  const DecoderParams& decoder() const { return decoder_; }

  void initialize(Rng& rng, const InitOptions& options = {});

  /// Every learnable tensor in a fixed order; fusion tensors only when
  /// aux_dim > 0.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  Parameter& parameter(const std::string& name);

  void zero_grads();

 private:
  ModelConfig config_;
  EncoderParams encoder_;
  DecoderParams decoder_;
};

}  // namespace obj2text
