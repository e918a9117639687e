#include "obj2text/layout.hpp"

#include <algorithm>
#include <cmath>

#include "obj2text/errors.hpp"
#include "obj2text/rng.hpp"

namespace obj2text {

bool BoundingBox::valid() const {
  constexpr double kSlack = 1e-9;
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
         x >= 0.0 && y >= 0.0 && x <= 1.0 && y <= 1.0 && w > 0.0 && h > 0.0 && w <= 1.0 &&
         h <= 1.0 && x + w <= 1.0 + kSlack && y + h <= 1.0 + kSlack;
}

BoundingBox normalize_bbox(const std::array<double, 4>& raw, double image_w, double image_h,
                           double tolerance) {
  const auto [left, top, width, height] = raw;
  auto describe = [&] {
    return "[" + std::to_string(left) + ", " + std::to_string(top) + ", " +
           std::to_string(width) + ", " + std::to_string(height) + "] in " +
           std::to_string(image_w) + "x" + std::to_string(image_h);
  };
  if (!(image_w > 0.0) || !(image_h > 0.0)) {
    throw InvalidBoxError("invalid image size for box " + describe());
  }
  if (!std::isfinite(left) || !std::isfinite(top) || !(width > 0.0) || !(height > 0.0) ||
      !std::isfinite(width) || !std::isfinite(height)) {
    throw InvalidBoxError("box must have positive width and height: " + describe());
  }
  if (left < -tolerance || top < -tolerance || left + width > image_w + tolerance ||
      top + height > image_h + tolerance) {
    throw InvalidBoxError("box lies outside the image: " + describe());
  }
  const double x0 = std::clamp(left, 0.0, image_w);
  const double y0 = std::clamp(top, 0.0, image_h);
  const double x1 = std::clamp(left + width, 0.0, image_w);
  const double y1 = std::clamp(top + height, 0.0, image_h);
  if (!(x1 > x0) || !(y1 > y0)) throw InvalidBoxError("box is empty after clamping: " + describe());

  BoundingBox box;
  box.x = std::clamp(x0 / image_w, 0.0, 1.0);
  box.y = std::clamp(y0 / image_h, 0.0, 1.0);
  box.w = std::clamp(x1 / image_w - box.x, 0.0, 1.0 - box.x);
  box.h = std::clamp(y1 / image_h - box.y, 0.0, 1.0 - box.y);
  if (!(box.w > 0.0) || !(box.h > 0.0)) {
    throw InvalidBoxError("box is empty after normalization: " + describe());
  }
  return box;
}

std::string to_string(ObjectOrder order) {
  switch (order) {
    case ObjectOrder::Source: return "source";
    case ObjectOrder::ByCategory: return "by-category";
    case ObjectOrder::ByPosition: return "by-position";
    case ObjectOrder::Shuffled: return "shuffled";
  }
  return "source";
}

ObjectOrder parse_object_order(std::string_view name) {
  if (name == "source") return ObjectOrder::Source;
  if (name == "by-category") return ObjectOrder::ByCategory;
  if (name == "by-position") return ObjectOrder::ByPosition;
  if (name == "shuffled") return ObjectOrder::Shuffled;
  throw ConfigError("unknown object order '" + std::string(name) +
                    "' (expected source, by-category, by-position or shuffled)");
}

ObjectLayout apply_object_order(ObjectLayout layout, ObjectOrder order, std::uint64_t seed,
                                std::uint64_t key) {
  switch (order) {
    case ObjectOrder::Source:
      break;
    case ObjectOrder::ByCategory:
      std::stable_sort(layout.begin(), layout.end(),
                       [](const auto& a, const auto& b) { return a.category < b.category; });
      break;
    case ObjectOrder::ByPosition:
      std::stable_sort(layout.begin(), layout.end(), [](const auto& a, const auto& b) {
        if (a.box.x != b.box.x) return a.box.x < b.box.x;
        return a.box.y < b.box.y;
      });
      break;
    case ObjectOrder::Shuffled: {
      Rng rng(splitmix64(seed) ^ key);
      rng.shuffle(std::span<LayoutObject>(layout));
      break;
    }
  }
  return layout;
}

}  // namespace obj2text
