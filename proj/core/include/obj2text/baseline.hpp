#pragma once

#include <span>
#include <string>
#include <vector>

#include "obj2text/dataset.hpp"

namespace obj2text {

/// Caption retrieval by category counts: a layout is reduced to its
/// per-category object counts and answered with the first reference of the
/// closest training layout (Euclidean distance, lowest index on ties).
class NearestNeighborBaseline {
 public:
  NearestNeighborBaseline(std::span<const CaptionedExample> train, std::size_t categories);

  std::size_t nearest(const ObjectLayout& layout) const;
  const std::string& caption(const ObjectLayout& layout) const;

 private:
  std::vector<double> counts(const ObjectLayout& layout) const;

  std::size_t categories_;
  std::vector<std::vector<double>> train_counts_;
  std::vector<std::string> captions_;
};

}  // namespace obj2text
