#include "obj2text/lstm.hpp"

#include <cmath>

#include "obj2text/errors.hpp"

namespace obj2text {

namespace {

void check_shapes(const Matrix& weights, const Matrix& bias, std::size_t input,
                  const Matrix& state) {
  const std::size_t hidden = state.rows() / 2;
  if (state.cols() != 1 || state.rows() % 2 != 0) {
    throw DimensionError("lstm: state must be a (2k x 1) column, got " + state.shape_string());
  }
  if (weights.rows() != 4 * hidden || weights.cols() != input + hidden) {
    throw DimensionError("lstm: weights " + weights.shape_string() + " do not match input " +
                         std::to_string(input) + " and hidden " + std::to_string(hidden));
  }
  if (bias.rows() != 4 * hidden || bias.cols() != 1) {
    throw DimensionError("lstm: bias " + bias.shape_string() + " does not match hidden " +
                         std::to_string(hidden));
  }
}

}  // namespace

Matrix lstm_cell_forward(const Matrix& weights, const Matrix& bias, const Matrix& x,
                         const Matrix& state, LstmCache* cache) {
  if (x.cols() != 1) throw DimensionError("lstm: input must be a column, got " + x.shape_string());
  check_shapes(weights, bias, x.rows(), state);
  const std::size_t n = x.rows();
  const std::size_t k = state.rows() / 2;

  Matrix gates(4 * k, 1);
  for (std::size_t r = 0; r < 4 * k; ++r) {
    const double* row = &weights(r, 0);
    double z = bias[r];
    for (std::size_t j = 0; j < n; ++j) z += row[j] * x[j];
    for (std::size_t j = 0; j < k; ++j) z += row[n + j] * state[j];
    gates[r] = r < 3 * k ? sigmoid(z) : std::tanh(z);
  }

  Matrix next(2 * k, 1);
  Matrix tanh_c(k, 1);
  for (std::size_t j = 0; j < k; ++j) {
    const double i = gates[j];
    const double f = gates[k + j];
    const double o = gates[2 * k + j];
    const double g = gates[3 * k + j];
    const double c = f * state[k + j] + i * g;
    tanh_c[j] = std::tanh(c);
    next[j] = o * tanh_c[j];
    next[k + j] = c;
  }

  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = Matrix(k, 1);
    cache->c_prev = Matrix(k, 1);
    for (std::size_t j = 0; j < k; ++j) {
      cache->h_prev[j] = state[j];
      cache->c_prev[j] = state[k + j];
    }
    cache->gates = std::move(gates);
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

void lstm_cell_backward(const Matrix& weights, const LstmCache& cache, const Matrix& d_state,
                        Matrix& d_weights, Matrix& d_bias, Matrix& d_x, Matrix& d_state_prev) {
  const std::size_t n = cache.x.rows();
  const std::size_t k = cache.h_prev.rows();
  const Matrix& gates = cache.gates;

  Matrix d_z(4 * k, 1);
  for (std::size_t j = 0; j < k; ++j) {
    const double i = gates[j];
    const double f = gates[k + j];
    const double o = gates[2 * k + j];
    const double g = gates[3 * k + j];
    const double tc = cache.tanh_c[j];
    const double dh = d_state[j];
    const double dc = d_state[k + j] + dh * o * (1.0 - tc * tc);

    d_z[j] = dc * g * i * (1.0 - i);
    d_z[k + j] = dc * cache.c_prev[j] * f * (1.0 - f);
    d_z[2 * k + j] = dh * tc * o * (1.0 - o);
    d_z[3 * k + j] = dc * i * (1.0 - g * g);
    d_state_prev[k + j] += dc * f;
  }

  for (std::size_t r = 0; r < 4 * k; ++r) {
    const double dz = d_z[r];
    d_bias[r] += dz;
    if (dz == 0.0) continue;
    double* dw_row = &d_weights(r, 0);
    const double* w_row = &weights(r, 0);
    for (std::size_t j = 0; j < n; ++j) {
      dw_row[j] += dz * cache.x[j];
      d_x[j] += dz * w_row[j];
    }
    for (std::size_t j = 0; j < k; ++j) {
      dw_row[n + j] += dz * cache.h_prev[j];
      d_state_prev[j] += dz * w_row[n + j];
    }
  }
}

}  // namespace obj2text
