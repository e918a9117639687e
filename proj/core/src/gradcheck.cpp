#include "obj2text/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "obj2text/errors.hpp"
#include "obj2text/training.hpp"

namespace obj2text {

namespace {

double checked(double v, const Parameter& p) {
  if (!std::isfinite(v)) throw NumericError("gradient check: non-finite loss for " + p.name);
  return v;
}

}  // namespace

double finite_difference_check(const LossFunction& loss, Parameter& p,
                               const GradCheckOptions& options) {
  if (!(options.eps > 0.0)) throw ConfigError("gradient check: eps must be positive");
  checked(loss(true), p);
  const Matrix analytic = p.grad;

  std::vector<std::size_t> coords(p.value.size());
  std::iota(coords.begin(), coords.end(), 0);
  if (options.max_coordinates != 0 && options.max_coordinates < coords.size()) {
    Rng rng(options.seed);
    rng.shuffle(std::span<std::size_t>(coords));
    coords.resize(options.max_coordinates);
  }

  double worst = 0.0;
  for (std::size_t idx : coords) {
    const double saved = p.value[idx];
    p.value[idx] = saved + options.eps;
    const double plus = checked(loss(false), p);
    p.value[idx] = saved - options.eps;
    const double minus = checked(loss(false), p);
    p.value[idx] = saved;

    const double numeric = (plus - minus) / (2.0 * options.eps);
    const double a = analytic[idx];
    const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

namespace {

CaptionedExample random_example(Rng& rng, std::size_t objects, std::size_t categories,
                                std::size_t vocabulary, std::size_t words, std::size_t aux_dim) {
  CaptionedExample ex;
  ex.id = "check";
  for (std::size_t i = 0; i < objects; ++i) {
    // The last object repeats the first category so the count lesion has
    // something to drop.
    const CategoryId c = i + 1 == objects && i > 0 ? ex.layout.front().category
                                                   : rng.below(categories);
    const double w = rng.uniform(0.1, 0.4);
    const double h = rng.uniform(0.1, 0.4);
    ex.layout.push_back({c, {rng.uniform(0.0, 1.0 - w), rng.uniform(0.0, 1.0 - h), w, h}});
  }
  std::vector<TokenId> caption = {Vocabulary::kBos};
  for (std::size_t i = 0; i < words; ++i) {
    caption.push_back(Vocabulary::kFirstWord + rng.below(vocabulary - Vocabulary::kFirstWord));
  }
  caption.push_back(Vocabulary::kEos);
  ex.captions.push_back(caption);
  for (std::size_t i = 0; i < aux_dim; ++i) ex.aux_features.push_back(rng.uniform(-1.0, 1.0));
  return ex;
}

}  // namespace

std::vector<TensorGradCheck> model_gradient_suite(std::uint64_t seed, double eps) {
  struct Variant {
    const char* name;
    AblationFlags flags;
    std::size_t aux_dim;
  };
  const Variant variants[] = {{"full+aux", {false, false}, 3},
                              {"no-locations", {true, false}, 0},
                              {"no-locations+no-counts", {true, true}, 0}};
  std::vector<TensorGradCheck> out;
  for (const auto& variant : variants) {
    ModelConfig mc;
    // A tiny model keeps the coordinate count low: every coordinate whose
    // gradient falls near the central-difference roundoff floor (about
    // 1e-10 absolute here) would otherwise dominate the relative error.
    mc.hidden = 3;
    mc.categories = 4;
    mc.vocabulary = 6;
    mc.aux_dim = variant.aux_dim;
    mc.ablation = variant.flags;
    Model model(mc);
    Rng rng(seed);
    model.initialize(rng, {1.2, 1.0});
    // Nonzero biases so their gradients are exercised away from the origin.
    for (Parameter* p : model.parameters()) {
      if (p->cols() == 1) {
        for (double& v : p->value.data()) v += rng.uniform(-0.2, 0.2);
      }
    }

    Rng data_rng = rng.fork(1);
    const std::vector<CaptionedExample> batch = {
        random_example(data_rng, 3, mc.categories, mc.vocabulary, 3, mc.aux_dim),
        random_example(data_rng, 2, mc.categories, mc.vocabulary, 4, mc.aux_dim)};
    const auto refs = caption_refs(batch);

    const LossFunction loss = [&](bool with_grads) {
      if (!with_grads) return batch_loss(model, refs).loss;
      model.zero_grads();
      Tape tape;
      const Var l = record_batch_loss(tape, model, refs);
      tape.backward(l);
      return tape.scalar(l);
    };
    for (Parameter* p : model.parameters()) {
      GradCheckOptions options;
      options.eps = eps;
      out.push_back({variant.name, p->name, finite_difference_check(loss, *p, options)});
    }
  }
  return out;
}

}  // namespace obj2text
