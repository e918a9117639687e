#include "obj2text/baseline.hpp"

#include <limits>

#include "obj2text/errors.hpp"

namespace obj2text {

NearestNeighborBaseline::NearestNeighborBaseline(std::span<const CaptionedExample> train,
                                                 std::size_t categories)
    : categories_(categories) {
  if (train.empty()) throw EmptyInputError("nearest-neighbour baseline: no training examples");
  for (const auto& ex : train) {
    if (ex.references.empty()) {
      throw InputError("nearest-neighbour baseline: example " + ex.id + " has no captions");
    }
    train_counts_.push_back(counts(ex.layout));
    captions_.push_back(ex.references.front());
  }
}

std::vector<double> NearestNeighborBaseline::counts(const ObjectLayout& layout) const {
  std::vector<double> out(categories_, 0.0);
  for (const auto& obj : layout) {
    if (obj.category >= categories_) {
      throw IndexError("nearest-neighbour baseline: category " + std::to_string(obj.category) +
                       " out of range");
    }
    out[obj.category] += 1.0;
  }
  return out;
}

std::size_t NearestNeighborBaseline::nearest(const ObjectLayout& layout) const {
  const auto query = counts(layout);
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < train_counts_.size(); ++i) {
    double d = 0.0;
    for (std::size_t c = 0; c < categories_; ++c) {
      const double diff = query[c] - train_counts_[i][c];
      d += diff * diff;
    }
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return best;
}

const std::string& NearestNeighborBaseline::caption(const ObjectLayout& layout) const {
  return captions_[nearest(layout)];
}

}  // namespace obj2text
