#include "obj2text/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "obj2text/errors.hpp"
#include "obj2text/rng.hpp"

namespace obj2text {

namespace {

constexpr double kAdjacency = 0.02;

struct Group {
  std::string category;
  std::vector<std::size_t> members;
};

std::vector<Group> group_by_category(std::span<const RawObject> objects) {
  std::vector<Group> groups;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.category == objects[i].category; });
    if (it == groups.end()) {
      groups.push_back({objects[i].category, {i}});
    } else {
      it->members.push_back(i);
    }
  }
  return groups;
}

std::string plural(const std::string& noun) {
  if (!noun.empty() && noun.back() == 's') return noun + "es";
  return noun + "s";
}

SceneTemplate template_for(SpatialRelation r) {
  switch (r) {
    case SpatialRelation::LeftOf: return SceneTemplate::LeftOf;
    case SpatialRelation::RightOf: return SceneTemplate::RightOf;
    case SpatialRelation::Above: return SceneTemplate::Above;
    case SpatialRelation::Below: return SceneTemplate::Below;
    case SpatialRelation::OnTopOf: return SceneTemplate::OnTopOf;
  }
  return SceneTemplate::LeftOf;
}

BoundingBox random_box(Rng& rng, const SyntheticConfig& config) {
  BoundingBox b;
  b.w = rng.uniform(config.min_extent, config.max_extent);
  b.h = rng.uniform(config.min_extent, config.max_extent);
  b.x = rng.uniform(0.0, 1.0 - b.w);
  b.y = rng.uniform(0.0, 1.0 - b.h);
  return b;
}

}  // namespace

SpatialRelation spatial_relation(const BoundingBox& a, const BoundingBox& b) {
  const bool overlap_x = a.x < b.x + b.w && b.x < a.x + a.w;
  if (overlap_x && std::abs(a.y + a.h - b.y) <= kAdjacency) return SpatialRelation::OnTopOf;
  const double dx = b.center_x() - a.center_x();
  const double dy = b.center_y() - a.center_y();
  if (std::abs(dx) >= std::abs(dy)) return dx > 0.0 ? SpatialRelation::LeftOf : SpatialRelation::RightOf;
  return dy > 0.0 ? SpatialRelation::Above : SpatialRelation::Below;
}

std::string relation_phrase(SpatialRelation relation) {
  switch (relation) {
    case SpatialRelation::LeftOf: return "to the left of";
    case SpatialRelation::RightOf: return "to the right of";
    case SpatialRelation::Above: return "above";
    case SpatialRelation::Below: return "below";
    case SpatialRelation::OnTopOf: return "on top of";
  }
  return "";
}

std::string count_phrase(const std::string& category, std::size_t count) {
  static const char* kNumbers[] = {"zero", "a", "two", "three", "four", "five", "six"};
  if (count == 1) return "a " + category;
  const std::string number = count < std::size(kNumbers) ? kNumbers[count] : std::to_string(count);
  return number + " " + plural(category);
}

SceneCaption describe_scene(std::span<const RawObject> objects) {
  if (objects.empty()) throw EmptyInputError("describe_scene: empty scene");
  const auto groups = group_by_category(objects);
  auto phrase = [&](const Group& g) { return count_phrase(g.category, g.members.size()); };

  SceneCaption out;
  if (groups.size() == 1) {
    double cx = 0.0;
    for (std::size_t i : groups[0].members) cx += objects[i].bbox.center_x();
    cx /= static_cast<double>(groups[0].members.size());
    const bool left = cx < 0.5;
    out.text = phrase(groups[0]) + (left ? " on the left" : " on the right");
    out.scene_template = left ? SceneTemplate::SingleLeft : SceneTemplate::SingleRight;
    return out;
  }

  const auto rel = spatial_relation(objects[groups[0].members.front()].bbox,
                                    objects[groups[1].members.front()].bbox);
  out.text = phrase(groups[0]) + " " + relation_phrase(rel) + " " + phrase(groups[1]);
  for (std::size_t g = 2; g < groups.size(); ++g) out.text += " and " + phrase(groups[g]);
  out.scene_template = template_for(rel);
  return out;
}

std::vector<RawExample> generate_synthetic(std::uint64_t seed, std::size_t n_examples,
                                           const SyntheticConfig& config) {
  if (config.categories.empty()) throw ConfigError("synthetic: no categories configured");
  if (config.min_objects == 0 || config.max_objects < config.min_objects) {
    throw ConfigError("synthetic: invalid object count range");
  }
  if (!(config.min_extent > 0.0) || config.max_extent < config.min_extent ||
      config.max_extent > 0.5) {
    throw ConfigError("synthetic: box extents must satisfy 0 < min <= max <= 0.5");
  }
  if (config.aux_dim != 0 && config.aux_dim < kSceneTemplateCount) {
    throw ConfigError("synthetic: aux_dim must be 0 or at least " +
                      std::to_string(kSceneTemplateCount));
  }

  Rng rng(seed);
  std::vector<RawExample> out;
  out.reserve(n_examples);
  for (std::size_t n = 0; n < n_examples; ++n) {
    const std::size_t count =
        config.min_objects + rng.below(config.max_objects - config.min_objects + 1);
    std::vector<std::string> used;
    RawExample ex;
    ex.id = std::to_string(n);
    for (std::size_t i = 0; i < count; ++i) {
      std::string category;
      if (i > 0 && rng.uniform() < config.repeat_probability) {
        category = used[rng.below(used.size())];
      } else {
        category = config.categories[rng.below(config.categories.size())];
      }
      if (std::find(used.begin(), used.end(), category) == used.end()) used.push_back(category);
      ex.objects.push_back({category, random_box(rng, config)});
    }

    // Emit the first instance of every category before any repeat, so the
    // two objects that decide the relation lead the sequence.
    {
      std::vector<RawObject> firsts, repeats;
      for (auto& o : ex.objects) {
        const bool seen = std::any_of(firsts.begin(), firsts.end(),
                                      [&](const RawObject& f) { return f.category == o.category; });
        (seen ? repeats : firsts).push_back(std::move(o));
      }
      firsts.insert(firsts.end(), repeats.begin(), repeats.end());
      ex.objects = std::move(firsts);
    }

    const auto groups = group_by_category(ex.objects);
    if (groups.size() >= 2 && rng.uniform() < config.stack_probability) {
      BoundingBox& top = ex.objects[groups[0].members.front()].bbox;
      BoundingBox& under = ex.objects[groups[1].members.front()].bbox;
      top.y = rng.uniform(0.0, 1.0 - top.h - under.h);
      under.y = top.y + top.h;
      const double lo = std::max(0.0, top.x - under.w + kAdjacency);
      const double hi = std::min(1.0 - under.w, top.x + top.w - kAdjacency);
      under.x = rng.uniform(lo, hi);
    }

    const auto caption = describe_scene(ex.objects);
    ex.captions.push_back(caption.text);
    if (config.aux_dim != 0) {
      ex.aux_features.assign(config.aux_dim, 0.0);
      ex.aux_features[static_cast<std::size_t>(caption.scene_template)] = 1.0;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace obj2text
