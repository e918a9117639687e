#include "obj2text/model.hpp"

#include "obj2text/errors.hpp"

namespace obj2text {

std::string describe(const AblationFlags& flags) {
  if (flags.no_locations && flags.no_counts) return "no-locations+no-counts";
  if (flags.no_locations) return "no-locations";
  if (flags.no_counts) return "no-counts";
  return "full";
}

namespace {

LstmParams make_lstm(const std::string& prefix, std::size_t input, std::size_t hidden) {
  return {Parameter(prefix + ".weights", 4 * hidden, input + hidden),
          Parameter(prefix + ".bias", 4 * hidden, 1)};
}

void fill_uniform(Parameter& p, Rng& rng, double scale) {
  for (double& v : p.value.data()) v = rng.uniform(-scale, scale);
}

}  // namespace

Model::Model(const ModelConfig& config) : config_(config) {
  if (config.hidden == 0 || config.categories == 0 || config.vocabulary == 0) {
    throw ConfigError("model: hidden size, category count and vocabulary size must be positive");
  }
  const std::size_t k = config.hidden;
  encoder_.category_embedding = Parameter("encoder.category_embedding", k, config.categories);
  encoder_.location_weights = Parameter("encoder.location_weights", k, 4);
  encoder_.location_bias = Parameter("encoder.location_bias", k, 1);
  encoder_.lstm = make_lstm("encoder.lstm", k, k);
  if (config.aux_dim > 0) {
    encoder_.fusion_weights = Parameter("encoder.fusion_weights", k, config.aux_dim);
    encoder_.fusion_bias = Parameter("encoder.fusion_bias", k, 1);
  }
  decoder_.word_embedding = Parameter("decoder.word_embedding", k, config.vocabulary);
  decoder_.lstm = make_lstm("decoder.lstm", k, k);
  decoder_.output_weights = Parameter("decoder.output_weights", config.vocabulary, k);
  decoder_.output_bias = Parameter("decoder.output_bias", config.vocabulary, 1);
}

void Model::initialize(Rng& rng, const InitOptions& options) {
  const std::size_t k = config_.hidden;
  for (Parameter* p : parameters()) {
    p->zero_grad();
    p->adam_m.fill(0.0);
    p->adam_v.fill(0.0);
    if (p->cols() == 1) {
      p->value.fill(0.0);
    } else {
      fill_uniform(*p, rng, options.scale);
    }
  }
  for (LstmParams* lstm : {&encoder_.lstm, &decoder_.lstm}) {
    for (std::size_t j = 0; j < k; ++j) lstm->bias.value[k + j] = options.forget_bias;
  }
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out = {&encoder_.category_embedding, &encoder_.location_weights,
                                 &encoder_.location_bias,      &encoder_.lstm.weights,
                                 &encoder_.lstm.bias};
  if (config_.aux_dim > 0) {
    out.push_back(&encoder_.fusion_weights);
    out.push_back(&encoder_.fusion_bias);
  }
  for (Parameter* p : {&decoder_.word_embedding, &decoder_.lstm.weights, &decoder_.lstm.bias,
                       &decoder_.output_weights, &decoder_.output_bias}) {
    out.push_back(p);
  }
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  auto mutable_params = const_cast<Model*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

Parameter& Model::parameter(const std::string& name) {
  for (Parameter* p : parameters()) {
    if (p->name == name) return *p;
  }
  throw IndexError("model has no parameter named '" + name + "'");
}

void Model::zero_grads() {
  for (Parameter* p : parameters()) p->zero_grad();
}

}  // namespace obj2text
