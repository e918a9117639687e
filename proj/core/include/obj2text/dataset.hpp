#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "obj2text/layout.hpp"
#include "obj2text/vocabulary.hpp"

namespace obj2text {

struct RawObject {
  std::string category;
  BoundingBox bbox;
};

/// One record of the line-delimited JSON corpus format:
///   {"id": str, "image_size": [w, h], "objects": [{"category": str,
///    "bbox": [x, y, w, h]}], "captions": [str], "aux_features": [real]}
/// Boxes are already normalized; "aux_features" is optional.
struct RawExample {
  std::string id;
  std::array<double, 2> image_size{1.0, 1.0};
  std::vector<RawObject> objects;
  std::vector<std::string> captions;
  std::vector<double> aux_features;
};

/// A RawExample mapped through the vocabularies.
struct CaptionedExample {
  std::string id;
  ObjectLayout layout;
  /// Each caption is BOS ... EOS.
  std::vector<std::vector<TokenId>> captions;
  /// Original caption strings, used as evaluation references.
  std::vector<std::string> references;
  std::vector<double> aux_features;
};

void write_dataset(std::ostream& out, std::span<const RawExample> examples);
void write_dataset(const std::filesystem::path& path, std::span<const RawExample> examples);
std::vector<RawExample> read_dataset(std::istream& in, const std::string& source = "<stream>");
std::vector<RawExample> read_dataset(const std::filesystem::path& path);

/// Registers every category of `examples` in sorted name order.
CategoryVocabulary build_category_vocabulary(std::span<const RawExample> examples);

/// Maps names to ids and captions to token ids. Throws IndexError naming the
/// example if a category is unknown.
CaptionedExample encode_example(const RawExample& raw, const Vocabulary& words,
                                const CategoryVocabulary& categories,
                                std::size_t max_caption_len = 16);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded disjoint partition of [0, n). Each split keeps ascending index
/// order. Throws ConfigError unless the fractions are non-negative and sum
/// to 1.
SplitIndices split_indices(std::size_t n, const SplitFractions& fractions, std::uint64_t seed);

template <class T>
std::vector<T> select(std::span<const T> items, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(items[i]);
  return out;
}

}  // namespace obj2text
