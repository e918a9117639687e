#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "obj2text/vocabulary.hpp"

namespace obj2text {

/// Box in image-normalized coordinates: left, top, width, height.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  bool valid() const;
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  std::array<double, 4> as_array() const { return {x, y, w, h}; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Converts a pixel box [left, top, width, height] into normalized
/// coordinates. Boxes may overhang the image by up to `tolerance` (same units
/// as the box) and are clamped; anything further out, or with non-positive
/// extent, throws InvalidBoxError.
BoundingBox normalize_bbox(const std::array<double, 4>& raw, double image_w, double image_h,
                           double tolerance = 1.0);

struct LayoutObject {
  CategoryId category = 0;
  BoundingBox box;

  friend bool operator==(const LayoutObject&, const LayoutObject&) = default;
};

/// Ordered (category, box) sequence consumed by the encoder.
using ObjectLayout = std::vector<LayoutObject>;

/// How objects are ordered before encoding.
enum class ObjectOrder { Source, ByCategory, ByPosition, Shuffled };

std::string to_string(ObjectOrder order);
ObjectOrder parse_object_order(std::string_view name);

/// Reorders a layout. `Shuffled` draws a permutation from (seed, key) so a
/// given example always gets the same order.
ObjectLayout apply_object_order(ObjectLayout layout, ObjectOrder order, std::uint64_t seed = 0,
                                std::uint64_t key = 0);

}  // namespace obj2text
