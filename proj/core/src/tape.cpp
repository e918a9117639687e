#include "obj2text/tape.hpp"

#include <cmath>
#include <memory>

#include "obj2text/errors.hpp"

namespace obj2text {

Var Tape::push(Matrix value, Pullback pullback) {
  if (consumed_) throw StateError("tape: recording on a tape that already ran backward");
  Node node;
  node.value = std::move(value);
  node.pullback = std::move(pullback);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

void Tape::check(Var v) const {
  if (v.id >= nodes_.size()) throw IndexError("tape: unknown node " + std::to_string(v.id));
}

const Matrix& Tape::value(Var v) const {
  check(v);
  const Node& n = nodes_[v.id];
  return n.external != nullptr ? *n.external : n.value;
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.size() != 1) throw DimensionError("tape: expected a scalar, got " + m.shape_string());
  return m[0];
}

void Tape::reset() {
  nodes_.clear();
  param_nodes_.clear();
  consumed_ = false;
}

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
  Var v = push(Matrix(), nullptr);
  nodes_[v.id].external = &p.value;
  nodes_[v.id].param = &p;
  param_nodes_.emplace(&p, v.id);
  return v;
}

Var Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::matmul(Var a, Var b) {
  Matrix out = obj2text::matmul(value(a), value(b));
  return push(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& av = t.value(a);
    const Matrix& bv = t.value(b);
    // dA += G * B^T, dB += A^T * G
    Matrix& ga = t.grad(a.id);
    for (std::size_t i = 0; i < av.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) {
        const double gij = g(i, j);
        if (gij == 0.0) continue;
        for (std::size_t p = 0; p < av.cols(); ++p) ga(i, p) += gij * bv(p, j);
      }
    t.grad(b.id) += matmul_transposed_lhs(av, g);
  });
}

Var Tape::add(Var a, Var b) {
  Matrix out = elementwise(BinaryOp::Add, value(a), value(b));
  return push(std::move(out), [a, b](Tape& t, std::size_t self) {
    t.grad(a.id) += t.grad(self);
    t.grad(b.id) += t.grad(self);
  });
}

Var Tape::mul(Var a, Var b) {
  Matrix out = elementwise(BinaryOp::Mul, value(a), value(b));
  return push(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& av = t.value(a);
    const Matrix& bv = t.value(b);
    Matrix& ga = t.grad(a.id);
    Matrix& gb = t.grad(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * bv[i];
      gb[i] += g[i] * av[i];
    }
  });
}

Var Tape::sigmoid(Var a) {
  Matrix out = elementwise(UnaryOp::Sigmoid, value(a));
  return push(std::move(out), [a](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& y = t.value(Var{self});
    Matrix& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var Tape::tanh(Var a) {
  Matrix out = elementwise(UnaryOp::Tanh, value(a));
  return push(std::move(out), [a](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& y = t.value(Var{self});
    Matrix& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var Tape::scale(Var a, double s) {
  Matrix out = value(a);
  out *= s;
  return push(std::move(out), [a, s](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Var Tape::affine(Var weights, Var x, Var bias) {
  Matrix out = obj2text::affine(value(weights), value(x), value(bias));
  return push(std::move(out), [weights, x, bias](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& wv = t.value(weights);
    const Matrix& xv = t.value(x);
    Matrix& gw = t.grad(weights.id);
    Matrix& gx = t.grad(x.id);
    Matrix& gb = t.grad(bias.id);
    for (std::size_t r = 0; r < wv.rows(); ++r) {
      const double gr = g[r];
      gb[r] += gr;
      if (gr == 0.0) continue;
      double* gw_row = &gw(r, 0);
      const double* w_row = &wv(r, 0);
      for (std::size_t j = 0; j < xv.rows(); ++j) {
        gw_row[j] += gr * xv[j];
        gx[j] += gr * w_row[j];
      }
    }
  });
}

Var Tape::column(Var table, std::size_t col) {
  const Matrix& tv = value(table);
  if (col >= tv.cols()) {
    throw IndexError("column: index " + std::to_string(col) + " out of range for " +
                     tv.shape_string());
  }
  Matrix out(tv.rows(), 1);
  for (std::size_t r = 0; r < tv.rows(); ++r) out[r] = tv(r, col);
  return push(std::move(out), [table, col](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix& gt = t.grad(table.id);
    for (std::size_t r = 0; r < g.rows(); ++r) gt(r, col) += g[r];
  });
}

Var Tape::slice_rows(Var a, std::size_t begin, std::size_t count) {
  const Matrix& av = value(a);
  if (begin + count > av.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of range for " +
                         av.shape_string());
  }
  Matrix out(count, av.cols());
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t c = 0; c < av.cols(); ++c) out(r, c) = av(begin + r, c);
  return push(std::move(out), [a, begin](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(a.id);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) ga(begin + r, c) += g(r, c);
  });
}

Var Tape::lstm_cell(Var weights, Var bias, Var x, Var state) {
  auto cache = std::make_shared<LstmCache>();
  Matrix out = lstm_cell_forward(value(weights), value(bias), value(x), value(state), cache.get());
  return push(std::move(out), [weights, bias, x, state, cache](Tape& t, std::size_t self) {
    lstm_cell_backward(t.value(weights), *cache, t.grad(self), t.grad(weights.id),
                       t.grad(bias.id), t.grad(x.id), t.grad(state.id));
  });
}

Var Tape::nll(Var logits, std::size_t target) {
  const Matrix& lv = value(logits);
  if (target >= lv.rows()) {
    throw IndexError("nll: target " + std::to_string(target) + " out of range for " +
                     lv.shape_string());
  }
  auto log_probs = std::make_shared<Matrix>(log_softmax_column(lv));
  Matrix out(1, 1, -(*log_probs)[target]);
  return push(std::move(out), [logits, target, log_probs](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    Matrix& gl = t.grad(logits.id);
    for (std::size_t i = 0; i < gl.rows(); ++i) {
      gl[i] += g * (std::exp((*log_probs)[i]) - (i == target ? 1.0 : 0.0));
    }
  });
}

Var Tape::sum(Var a) {
  double s = 0.0;
  for (double v : value(a).data()) s += v;
  return push(Matrix(1, 1, s), [a](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (double& v : t.grad(a.id).data()) v += g;
  });
}

Var Tape::sum_squares(Var a) {
  return push(Matrix(1, 1, frobenius_norm_squared(value(a))), [a](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const Matrix& av = t.value(a);
    Matrix& ga = t.grad(a.id);
    for (std::size_t i = 0; i < av.size(); ++i) ga[i] += 2.0 * g * av[i];
  });
}

Var Tape::add_n(std::span<const Var> terms) {
  if (terms.empty()) throw InputError("add_n: no terms");
  Matrix out = value(terms[0]);
  for (std::size_t i = 1; i < terms.size(); ++i) out += value(terms[i]);
  std::vector<Var> ids(terms.begin(), terms.end());
  return push(std::move(out), [ids = std::move(ids)](Tape& t, std::size_t self) {
    for (Var v : ids) t.grad(v.id) += t.grad(self);
  });
}

void Tape::backward(Var loss) {
  if (consumed_) throw StateError("backward: called twice without a new forward pass");
  check(loss);
  const Matrix& lv = value(loss);
  if (lv.size() != 1) throw StateError("backward: loss must be a scalar, got " + lv.shape_string());
  consumed_ = true;

  for (std::size_t i = 0; i <= loss.id; ++i) {
    const Matrix& v = value(Var{i});
    nodes_[i].grad = Matrix(v.rows(), v.cols());
  }
  nodes_[loss.id].grad[0] = 1.0;

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (nodes_[i].pullback) nodes_[i].pullback(*this, i);
  }
  for (std::size_t i = 0; i <= loss.id; ++i) {
    if (nodes_[i].param != nullptr) nodes_[i].param->grad += nodes_[i].grad;
  }
}

}  // namespace obj2text
