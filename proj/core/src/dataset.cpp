#include "obj2text/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "obj2text/errors.hpp"
#include "obj2text/rng.hpp"

namespace obj2text {

using nlohmann::json;

namespace {

json to_json(const RawExample& ex) {
  json objects = json::array();
  for (const auto& o : ex.objects) {
    objects.push_back({{"category", o.category}, {"bbox", o.bbox.as_array()}});
  }
  json j = {{"id", ex.id},
            {"image_size", ex.image_size},
            {"objects", std::move(objects)},
            {"captions", ex.captions}};
  if (!ex.aux_features.empty()) j["aux_features"] = ex.aux_features;
  return j;
}

RawExample from_json(const json& j) {
  RawExample ex;
  ex.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
  if (j.contains("image_size")) ex.image_size = j.at("image_size").get<std::array<double, 2>>();
  for (const auto& o : j.at("objects")) {
    RawObject obj;
    obj.category = o.at("category").get<std::string>();
    const auto raw = o.at("bbox").get<std::array<double, 4>>();
    obj.bbox = BoundingBox{raw[0], raw[1], raw[2], raw[3]};
    if (!obj.bbox.valid()) {
      throw InvalidBoxError("object '" + obj.category + "' has a box outside the unit square");
    }
    ex.objects.push_back(std::move(obj));
  }
  ex.captions = j.at("captions").get<std::vector<std::string>>();
  if (j.contains("aux_features")) ex.aux_features = j.at("aux_features").get<std::vector<double>>();
  return ex;
}

}  // namespace

void write_dataset(std::ostream& out, std::span<const RawExample> examples) {
  for (const auto& ex : examples) out << to_json(ex).dump() << '\n';
}

void write_dataset(const std::filesystem::path& path, std::span<const RawExample> examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path.string() + " for writing");
  write_dataset(out, examples);
  if (!out) throw ParseError("failed writing " + path.string());
}

std::vector<RawExample> read_dataset(std::istream& in, const std::string& source) {
  std::vector<RawExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidBoxError& e) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<RawExample> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open dataset " + path.string());
  return read_dataset(in, path.string());
}

CategoryVocabulary build_category_vocabulary(std::span<const RawExample> examples) {
  std::set<std::string> names;
  for (const auto& ex : examples)
    for (const auto& o : ex.objects) names.insert(o.category);
  return CategoryVocabulary(std::vector<std::string>(names.begin(), names.end()));
}

CaptionedExample encode_example(const RawExample& raw, const Vocabulary& words,
                                const CategoryVocabulary& categories,
                                std::size_t max_caption_len) {
  CaptionedExample ex;
  ex.id = raw.id;
  ex.aux_features = raw.aux_features;
  for (const auto& o : raw.objects) {
    auto id = categories.find(o.category);
    if (!id) {
      throw IndexError("example " + raw.id + ": unknown category '" + o.category + "'");
    }
    ex.layout.push_back({*id, o.bbox});
  }
  for (const auto& c : raw.captions) ex.captions.push_back(encode_caption(c, words, max_caption_len));
  ex.references = raw.captions;
  return ex;
}

SplitIndices split_indices(std::size_t n, const SplitFractions& fractions, std::uint64_t seed) {
  const double sum = fractions.train + fractions.val + fractions.test;
  if (fractions.train < 0.0 || fractions.val < 0.0 || fractions.test < 0.0 ||
      std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative and sum to 1 (got " +
                      std::to_string(fractions.train) + ", " + std::to_string(fractions.val) +
                      ", " + std::to_string(fractions.test) + ")");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  const auto n_train = std::min<std::size_t>(n, std::llround(fractions.train * n));
  const auto n_val = std::min<std::size_t>(n - n_train, std::llround(fractions.val * n));

  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + n_train);
  out.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  out.test.assign(order.begin() + n_train + n_val, order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace obj2text
