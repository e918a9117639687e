#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "obj2text/parameter.hpp"
#include "obj2text/rng.hpp"

namespace obj2text {

/// Loss callback for gradient checking. With `with_grads == true` it must
/// zero all gradients, run forward + backward and return the loss; otherwise
/// it only evaluates the loss.
using LossFunction = std::function<double(bool with_grads)>;

struct GradCheckOptions {
  double eps = 1e-5;
  /// Coordinates sampled per parameter; 0 checks every coordinate.
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 0;
};

/// Compares p.grad against central differences of `loss` and returns
///   max |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
/// over the checked coordinates. Throws NumericError if `loss` is not finite.
double finite_difference_check(const LossFunction& loss, Parameter& p,
                               const GradCheckOptions& options = {});

struct TensorGradCheck {
  /// Model variant, e.g. "full+aux" or "no-locations".
  std::string variant;
  std::string tensor;
  double relative_error = 0.0;
};

/// Finite-difference check of every parameter tensor of a small random model
/// on a random 2-example batch, for the full model with aux fusion and for
/// both lesioned encoders. Every coordinate is checked.
std::vector<TensorGradCheck> model_gradient_suite(std::uint64_t seed, double eps = 1e-5);

}  // namespace obj2text
