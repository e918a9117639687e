#pragma once

#include <string>

#include "obj2text/matrix.hpp"

namespace obj2text {

/// A learnable tensor together with its gradient and Adam moment estimates.
/// All four matrices always share one shape.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, std::size_t rows, std::size_t cols)
      : name(std::move(name)),
        value(rows, cols),
        grad(rows, cols),
        adam_m(rows, cols),
        adam_v(rows, cols) {}

  void zero_grad() { grad.fill(0.0); }
  std::size_t rows() const { return value.rows(); }
  std::size_t cols() const { return value.cols(); }

  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
};

}  // namespace obj2text
