#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "obj2text/lstm.hpp"
#include "obj2text/matrix.hpp"
#include "obj2text/parameter.hpp"

namespace obj2text {

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode differentiation tape.
///
/// Every operation computes its value eagerly and records a pullback. Calling
/// backward() on a scalar node runs the pullbacks in reverse creation order
/// and adds the resulting gradients into the `grad` of each Parameter that was
/// bound with param(). A tape supports exactly one backward pass; record a new
/// forward pass on a fresh (or reset) tape for the next step.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf bound to a parameter. Repeated calls return the same node.
  Var param(Parameter& p);
  Var constant(Matrix value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var scale(Var a, double s);

  /// weights * x + bias, for column vectors x and bias.
  Var affine(Var weights, Var x, Var bias);
  /// Column `col` of `table` as a column vector (embedding lookup).
  Var column(Var table, std::size_t col);
  Var slice_rows(Var a, std::size_t begin, std::size_t count);
  /// Fused LSTM step; see lstm_cell_forward for the layout of `state`.
  Var lstm_cell(Var weights, Var bias, Var x, Var state);
  /// -log softmax(logits)[target] for a column of logits; a 1x1 node.
  Var nll(Var logits, std::size_t target);

  Var sum(Var a);
  Var sum_squares(Var a);
  /// Sum of same-shaped nodes.
  Var add_n(std::span<const Var> terms);

  const Matrix& value(Var v) const;
  double scalar(Var v) const;

  void backward(Var loss);
  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }
  void reset();

 private:
  using Pullback = std::function<void(Tape&, std::size_t self)>;

  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Parameter* param = nullptr;
    Matrix grad;
    Pullback pullback;
  };

  Var push(Matrix value, Pullback pullback);
  Matrix& grad(std::size_t id) { return nodes_[id].grad; }
  void check(Var v) const;

  std::vector<Node> nodes_;
  std::unordered_map<Parameter*, std::size_t> param_nodes_;
  bool consumed_ = false;
};

}  // namespace obj2text
