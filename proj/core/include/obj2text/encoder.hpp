#pragma once

#include <span>

#include "obj2text/layout.hpp"
#include "obj2text/matrix.hpp"
#include "obj2text/model.hpp"
#include "obj2text/tape.hpp"

namespace obj2text {

/// Input vector of one encoder step: the category's embedding column plus
/// the projected box (W_l * [x, y, w, h] + b_l). With no_locations the box
/// term is left out entirely. Throws IndexError for an unknown category.
Matrix embed_step(const EncoderParams& params, CategoryId category, const BoundingBox& box,
                  const AblationFlags& flags);

/// One LSTM step on the stacked state [h; c]; returns the new [h; c].
Matrix lstm_step(const LstmParams& params, const Matrix& state, const Matrix& x);

/// Applies the no_counts deduplication (first occurrence of each category
/// wins). Throws EmptyInputError if nothing is left.
ObjectLayout prepare_layout(const ObjectLayout& layout, const AblationFlags& flags);

/// Runs one step per object from the zero state and returns the final hidden
/// state h_L as a (k x 1) column.
Matrix encode_layout(const EncoderParams& params, const ObjectLayout& layout,
                     const AblationFlags& flags);

/// h_L + (W_f * aux + b_f). Identity when the model has no fusion projection
/// and `aux` is empty; DimensionError when `aux` does not match.
Matrix fuse_auxiliary(const EncoderParams& params, const Matrix& encoding,
                      std::span<const double> aux);

/// Recorded variants of the above for training.
Var encode_layout(Tape& tape, EncoderParams& params, const ObjectLayout& layout,
                  const AblationFlags& flags);
Var fuse_auxiliary(Tape& tape, EncoderParams& params, Var encoding, std::span<const double> aux);

}  // namespace obj2text
