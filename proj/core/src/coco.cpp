#include "obj2text/coco.hpp"

#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "obj2text/errors.hpp"

namespace obj2text {

using nlohmann::json;

namespace {

json parse_file(std::istream& in, const char* what) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": malformed JSON at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
}

const json& require(const json& j, const char* key, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(context + ": missing field \"" + key + "\"");
  }
  return j.at(key);
}

std::string record_id(const json& j) {
  return j.is_object() && j.contains("id") ? j.at("id").dump() : std::string("?");
}

struct ImageInfo {
  double width = 0.0;
  double height = 0.0;
  std::vector<RawObject> objects;
  std::vector<std::string> captions;
};

}  // namespace

CocoDataset load_coco(std::istream& instances_in, std::istream& captions_in) {
  const json instances = parse_file(instances_in, "instances");
  const json captions = parse_file(captions_in, "captions");

  CocoDataset out;
  std::map<long long, std::string> category_names;
  for (const auto& c : require(instances, "categories", "instances")) {
    const std::string ctx = "instances category " + record_id(c);
    try {
      const auto id = require(c, "id", ctx).get<long long>();
      auto name = require(c, "name", ctx).get<std::string>();
      out.categories.add(name);
      category_names[id] = std::move(name);
    } catch (const json::exception& e) {
      throw ParseError(ctx + ": " + e.what());
    }
  }

  // Images in file order.
  std::vector<long long> image_order;
  std::map<long long, ImageInfo> images;
  for (const auto& img : require(instances, "images", "instances")) {
    const std::string ctx = "instances image " + record_id(img);
    try {
      const auto id = require(img, "id", ctx).get<long long>();
      ImageInfo info;
      info.width = require(img, "width", ctx).get<double>();
      info.height = require(img, "height", ctx).get<double>();
      if (!images.emplace(id, std::move(info)).second) throw ParseError(ctx + ": duplicate image id");
      image_order.push_back(id);
    } catch (const json::exception& e) {
      throw ParseError(ctx + ": " + e.what());
    }
  }

  for (const auto& ann : require(instances, "annotations", "instances")) {
    const std::string ctx = "instances annotation " + record_id(ann);
    try {
      const auto image_id = require(ann, "image_id", ctx).get<long long>();
      auto img = images.find(image_id);
      if (img == images.end()) {
        throw ParseError(ctx + ": references missing image_id " + std::to_string(image_id));
      }
      const auto category_id = require(ann, "category_id", ctx).get<long long>();
      auto cat = category_names.find(category_id);
      if (cat == category_names.end()) {
        throw ParseError(ctx + ": references missing category_id " + std::to_string(category_id));
      }
      const auto raw = require(ann, "bbox", ctx).get<std::array<double, 4>>();
      RawObject obj;
      obj.category = cat->second;
      try {
        obj.bbox = normalize_bbox(raw, img->second.width, img->second.height, 1.0);
      } catch (const InvalidBoxError& e) {
        throw ParseError(ctx + ": " + e.what());
      }
      img->second.objects.push_back(std::move(obj));
    } catch (const json::exception& e) {
      throw ParseError(ctx + ": " + e.what());
    }
  }

  for (const auto& ann : require(captions, "annotations", "captions")) {
    const std::string ctx = "captions annotation " + record_id(ann);
    try {
      const auto image_id = require(ann, "image_id", ctx).get<long long>();
      auto img = images.find(image_id);
      if (img == images.end()) {
        throw ParseError(ctx + ": references missing image_id " + std::to_string(image_id));
      }
      img->second.captions.push_back(require(ann, "caption", ctx).get<std::string>());
    } catch (const json::exception& e) {
      throw ParseError(ctx + ": " + e.what());
    }
  }

  for (long long id : image_order) {
    ImageInfo& info = images.at(id);
    if (info.objects.empty()) {
      ++out.skipped_without_objects;
      continue;
    }
    if (info.captions.empty()) {
      ++out.skipped_without_captions;
      continue;
    }
    RawExample ex;
    ex.id = std::to_string(id);
    ex.image_size = {info.width, info.height};
    ex.objects = std::move(info.objects);
    ex.captions = std::move(info.captions);
    out.examples.push_back(std::move(ex));
  }
  return out;
}

CocoDataset load_coco(const std::filesystem::path& instances_file,
                      const std::filesystem::path& captions_file) {
  std::ifstream instances(instances_file, std::ios::binary);
  if (!instances) throw ParseError("cannot open " + instances_file.string());
  std::ifstream captions(captions_file, std::ios::binary);
  if (!captions) throw ParseError("cannot open " + captions_file.string());
  return load_coco(instances, captions);
}

}  // namespace obj2text
