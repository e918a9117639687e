#pragma once

#include <cstddef>

#include "obj2text/matrix.hpp"

namespace obj2text {

/// Intermediate values of one LSTM step, kept for the backward pass.
struct LstmCache {
  Matrix x;
  Matrix h_prev;
  Matrix c_prev;
  Matrix gates;  // activated, stacked [i; f; o; g]
  Matrix tanh_c;
};

/// One standard LSTM step.
///
/// `weights` is (4k x (n + k)) acting on the stacked input [x; h_prev], `bias`
/// is (4k x 1) and `state` is the stacked (2k x 1) vector [h_prev; c_prev].
/// Gate rows are ordered input, forget, output, candidate:
///
///   i, f, o = sigmoid(.)   g = tanh(.)
///   c = f * c_prev + i * g
///   h = o * tanh(c)
///
/// Returns the new stacked state [h; c]. When `cache` is non-null it receives
/// what lstm_cell_backward needs.
Matrix lstm_cell_forward(const Matrix& weights, const Matrix& bias, const Matrix& x,
                         const Matrix& state, LstmCache* cache = nullptr);

/// Accumulates gradients of one step given d(loss)/d[h; c] in `d_state`.
/// Outputs are added into (not assigned to) the four gradient arguments.
void lstm_cell_backward(const Matrix& weights, const LstmCache& cache, const Matrix& d_state,
                        Matrix& d_weights, Matrix& d_bias, Matrix& d_x, Matrix& d_state_prev);

/// Zero [h; c] for hidden size k.
inline Matrix lstm_zero_state(std::size_t hidden) { return Matrix(2 * hidden, 1); }

}  // namespace obj2text
