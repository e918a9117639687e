#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "obj2text/dataset.hpp"
#include "obj2text/vocabulary.hpp"

namespace obj2text {

struct CocoDataset {
  std::vector<RawExample> examples;
  /// Categories in the order of the instances file's "categories" array.
  CategoryVocabulary categories;
  std::size_t skipped_without_objects = 0;
  std::size_t skipped_without_captions = 0;
};

/// Reads MS-COCO instances and captions JSON. Produces one example per image
/// that has at least one object and one caption; objects keep annotation-file
/// order and boxes are normalized by the image size (1px overhang tolerated).
/// Throws ParseError naming the offending record on schema violations.
CocoDataset load_coco(std::istream& instances, std::istream& captions);
CocoDataset load_coco(const std::filesystem::path& instances_file,
                      const std::filesystem::path& captions_file);

}  // namespace obj2text
