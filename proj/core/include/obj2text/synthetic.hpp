#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "obj2text/dataset.hpp"

namespace obj2text {

struct SyntheticConfig {
  std::vector<std::string> categories = {"dog",  "cat",   "ball",  "car",   "tree",
                                         "bird", "horse", "chair", "table", "boat"};
  std::size_t min_objects = 1;
  std::size_t max_objects = 4;
  /// Chance that an object after the first reuses an already drawn category.
  double repeat_probability = 0.4;
  /// Chance that a multi-group scene places the second group's first object
  /// directly underneath the first group's first object.
  double stack_probability = 0.2;
  double min_extent = 0.1;
  double max_extent = 0.3;
  /// Width of the one-hot scene-template feature; 0 disables aux features.
  std::size_t aux_dim = 0;
};

enum class SpatialRelation { LeftOf, RightOf, Above, Below, OnTopOf };

/// Caption shapes produced by the grammar; used as the aux-feature label.
enum class SceneTemplate { SingleLeft, SingleRight, LeftOf, RightOf, Above, Below, OnTopOf };
inline constexpr std::size_t kSceneTemplateCount = 7;

/// Relation of `a` with respect to `b`, as in "a <relation> b". "on top of"
/// requires horizontal overlap and a's bottom edge within 0.02 of b's top;
/// otherwise the dominant center offset picks left/right or above/below.
SpatialRelation spatial_relation(const BoundingBox& a, const BoundingBox& b);
std::string relation_phrase(SpatialRelation relation);

/// "a dog", "two dogs", ...
std::string count_phrase(const std::string& category, std::size_t count);

struct SceneCaption {
  std::string text;
  SceneTemplate scene_template = SceneTemplate::SingleLeft;
};

/// Gold caption of a scene. Objects are grouped by category in order of first
/// occurrence; the relation between the first instances of the first two
/// groups determines the phrase.
SceneCaption describe_scene(std::span<const RawObject> objects);

/// Deterministic synthetic corpus: one gold caption per scene.
std::vector<RawExample> generate_synthetic(std::uint64_t seed, std::size_t n_examples,
                                           const SyntheticConfig& config = {});

}  // namespace obj2text
