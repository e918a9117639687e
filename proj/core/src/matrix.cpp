#include "obj2text/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "obj2text/errors.hpp"

namespace obj2text {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match shape (" + std::to_string(rows_) + "x" +
                         std::to_string(cols_) + ")");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Matrix::shape_string() const {
  std::ostringstream os;
  os << "(" << rows_ << "x" << cols_ << ")";
  return os.str();
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: shape mismatch " + a.shape_string() + " x " + b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = a.cols();
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = &out(i, 0);
    for (std::size_t p = 0; p < n; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      const double* b_row = &b(p, 0);
      for (std::size_t j = 0; j < m; ++j) out_row[j] += av * b_row[j];
    }
  }
  return out;
}

Matrix matmul_transposed_lhs(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_transposed_lhs: shape mismatch " + a.shape_string() + "^T x " +
                         b.shape_string());
  }
  Matrix out(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.rows(); ++p) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double av = a(p, i);
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += av * b(p, j);
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix affine(const Matrix& weights, const Matrix& x, const Matrix& bias) {
  if (x.cols() != 1 || weights.cols() != x.rows() || bias.rows() != weights.rows() ||
      bias.cols() != 1) {
    throw DimensionError("affine: shape mismatch " + weights.shape_string() + " * " +
                         x.shape_string() + " + " + bias.shape_string());
  }
  Matrix out = bias;
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    const double* row = &weights(r, 0);
    double z = 0.0;
    for (std::size_t j = 0; j < x.rows(); ++j) z += row[j] * x[j];
    out[r] += z;
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  // exp(-700) is still a normal double, so the result stays strictly positive.
  const double e = std::exp(std::max(x, -700.0));
  return e / (1.0 + e);
}

Matrix elementwise(UnaryOp op, const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  auto src = a.data();
  auto dst = out.data();
  switch (op) {
    case UnaryOp::Sigmoid:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = sigmoid(src[i]);
      break;
    case UnaryOp::Tanh:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::tanh(src[i]);
      break;
  }
  return out;
}

Matrix elementwise(BinaryOp op, const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, op == BinaryOp::Add ? "add" : "mul");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = op == BinaryOp::Add ? a[i] + b[i] : a[i] * b[i];
  }
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    double mx = logits(r, 0);
    for (std::size_t c = 1; c < logits.cols(); ++c) mx = std::max(mx, logits(r, c));
    double total = 0.0;
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      out(r, c) = std::exp(logits(r, c) - mx);
      total += out(r, c);
    }
    for (std::size_t c = 0; c < logits.cols(); ++c) out(r, c) /= total;
  }
  return out;
}

Matrix log_softmax_column(const Matrix& logits) {
  if (logits.cols() != 1) {
    throw DimensionError("log_softmax_column: expected a column vector, got " +
                         logits.shape_string());
  }
  double mx = logits[0];
  for (std::size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += std::exp(logits[i] - mx);
  const double log_z = mx + std::log(total);
  Matrix out(logits.rows(), 1);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
  return out;
}

double frobenius_norm_squared(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return s;
}

}  // namespace obj2text
