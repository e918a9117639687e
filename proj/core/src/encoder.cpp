#include "obj2text/encoder.hpp"

#include <algorithm>

#include "obj2text/errors.hpp"

namespace obj2text {

namespace {

Matrix box_column(const BoundingBox& box) {
  const auto values = box.as_array();
  return Matrix::column(values);
}

void check_category(const EncoderParams& params, CategoryId category) {
  if (category >= params.category_embedding.cols()) {
    throw IndexError("encoder: category id " + std::to_string(category) +
                     " out of range (V = " + std::to_string(params.category_embedding.cols()) +
                     ")");
  }
}

std::size_t fusion_width(const EncoderParams& params) { return params.fusion_weights.cols(); }

void check_aux(const EncoderParams& params, std::span<const double> aux) {
  if (aux.size() != fusion_width(params)) {
    throw DimensionError("fuse_auxiliary: expected " + std::to_string(fusion_width(params)) +
                         " auxiliary features, got " + std::to_string(aux.size()));
  }
}

Matrix hidden_part(const Matrix& state) {
  const std::size_t k = state.rows() / 2;
  Matrix h(k, 1);
  for (std::size_t j = 0; j < k; ++j) h[j] = state[j];
  return h;
}

}  // namespace

Matrix embed_step(const EncoderParams& params, CategoryId category, const BoundingBox& box,
                  const AblationFlags& flags) {
  check_category(params, category);
  const Matrix& table = params.category_embedding.value;
  Matrix x(table.rows(), 1);
  for (std::size_t r = 0; r < table.rows(); ++r) x[r] = table(r, category);
  if (flags.no_locations) return x;
  const Matrix location =
      affine(params.location_weights.value, box_column(box), params.location_bias.value);
  return elementwise(BinaryOp::Add, x, location);
}

Matrix lstm_step(const LstmParams& params, const Matrix& state, const Matrix& x) {
  return lstm_cell_forward(params.weights.value, params.bias.value, x, state);
}

ObjectLayout prepare_layout(const ObjectLayout& layout, const AblationFlags& flags) {
  ObjectLayout out;
  if (flags.no_counts) {
    for (const auto& obj : layout) {
      const bool seen = std::any_of(out.begin(), out.end(),
                                    [&](const LayoutObject& o) { return o.category == obj.category; });
      if (!seen) out.push_back(obj);
    }
  } else {
    out = layout;
  }
  if (out.empty()) throw EmptyInputError("encoder: empty object layout");
  return out;
}

Matrix encode_layout(const EncoderParams& params, const ObjectLayout& layout,
                     const AblationFlags& flags) {
  const ObjectLayout objects = prepare_layout(layout, flags);
  Matrix state = lstm_zero_state(params.category_embedding.rows());
  for (const auto& obj : objects) {
    state = lstm_step(params.lstm, state, embed_step(params, obj.category, obj.box, flags));
  }
  return hidden_part(state);
}

Matrix fuse_auxiliary(const EncoderParams& params, const Matrix& encoding,
                      std::span<const double> aux) {
  check_aux(params, aux);
  if (aux.empty()) return encoding;
  const Matrix projected =
      affine(params.fusion_weights.value, Matrix::column(aux), params.fusion_bias.value);
  return elementwise(BinaryOp::Add, encoding, projected);
}

Var encode_layout(Tape& tape, EncoderParams& params, const ObjectLayout& layout,
                  const AblationFlags& flags) {
  const ObjectLayout objects = prepare_layout(layout, flags);
  const std::size_t k = params.category_embedding.rows();
  const Var table = tape.param(params.category_embedding);
  const Var weights = tape.param(params.lstm.weights);
  const Var bias = tape.param(params.lstm.bias);
  Var state = tape.constant(lstm_zero_state(k));
  for (const auto& obj : objects) {
    check_category(params, obj.category);
    Var x = tape.column(table, obj.category);
    if (!flags.no_locations) {
      const Var location = tape.affine(tape.param(params.location_weights),
                                       tape.constant(box_column(obj.box)),
                                       tape.param(params.location_bias));
      x = tape.add(x, location);
    }
    state = tape.lstm_cell(weights, bias, x, state);
  }
  return tape.slice_rows(state, 0, k);
}

Var fuse_auxiliary(Tape& tape, EncoderParams& params, Var encoding, std::span<const double> aux) {
  check_aux(params, aux);
  if (aux.empty()) return encoding;
  const Var projected = tape.affine(tape.param(params.fusion_weights),
                                    tape.constant(Matrix::column(aux)),
                                    tape.param(params.fusion_bias));
  return tape.add(encoding, projected);
}

}  // namespace obj2text
