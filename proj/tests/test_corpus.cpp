#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "obj2text/coco.hpp"
#include "obj2text/dataset.hpp"
#include "obj2text/errors.hpp"
#include "obj2text/layout.hpp"
#include "obj2text/synthetic.hpp"
#include "obj2text/vocabulary.hpp"

using namespace obj2text;

TEST_CASE("tokenize") {
  CHECK(tokenize("A man, riding!") == std::vector<std::string>{"a", "man", "riding"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("Two dogs; 2 bowls.") == std::vector<std::string>{"two", "dogs", "2", "bowls"});
  CHECK(tokenize("  tabs\tand\nnewlines  ") == std::vector<std::string>{"tabs", "and", "newlines"});
}

TEST_CASE("vocabulary construction and encoding") {
  const std::vector<std::string> corpus = {"a a a", "b"};
  const Vocabulary v = build_vocabulary(corpus, 2);
  CHECK(v.contains("a"));
  CHECK_FALSE(v.contains("b"));
  CHECK(v.id("b") == Vocabulary::kUnk);
  CHECK(v.size() == Vocabulary::kFirstWord + 1);
  CHECK(v.token(Vocabulary::kPad) == "<pad>");
  CHECK(v.token(Vocabulary::kBos) == "<bos>");
  CHECK(v.token(Vocabulary::kEos) == "<eos>");

  const Vocabulary all = build_vocabulary(corpus, 1);
  CHECK(all.contains("a"));
  CHECK(all.contains("b"));

  CHECK_THROWS_AS(build_vocabulary(std::vector<std::string>{}, 1), ConfigError);
  CHECK_THROWS_AS(build_vocabulary(corpus, 0), ConfigError);
  CHECK_THROWS_AS(all.token(99), IndexError);

  const auto ids = encode_caption("A b C", all);
  CHECK(ids.front() == Vocabulary::kBos);
  CHECK(ids.back() == Vocabulary::kEos);
  CHECK(ids.size() == 5);
  CHECK(ids[3] == Vocabulary::kUnk);

  const auto truncated = encode_caption("a a a a a", all, 2);
  CHECK(truncated.size() == 4);
  CHECK(truncated.back() == Vocabulary::kEos);
}

TEST_CASE("vocabulary round trip substitutes only rare tokens") {
  const std::vector<std::string> corpus = {"the dog runs", "the dog sits", "a zebra"};
  const Vocabulary v = build_vocabulary(corpus, 2);
  const std::string text = "The dog, a ZEBRA";
  const auto tokens = tokenize(text);
  const auto back = v.decode(v.encode(tokens));
  REQUIRE(back.size() == tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) {
      CHECK(back[i] == tokens[i]);
    } else {
      CHECK(back[i] == "<unk>");
    }
  }
}

TEST_CASE("normalize_bbox") {
  CHECK(normalize_bbox({0, 0, 640, 480}, 640, 480) == BoundingBox{0, 0, 1, 1});
  CHECK(normalize_bbox({50, 25, 100, 50}, 200, 100) == BoundingBox{0.25, 0.25, 0.5, 0.5});
  CHECK_THROWS_AS(normalize_bbox({0, 0, 0, 10}, 100, 100), InvalidBoxError);
  CHECK_THROWS_AS(normalize_bbox({0, 0, 10, -1}, 100, 100), InvalidBoxError);
  const BoundingBox clamped = normalize_bbox({-0.5, 0, 100.8, 50}, 100, 100);
  CHECK(clamped.valid());
  CHECK(clamped.x == 0.0);
  CHECK_THROWS_AS(normalize_bbox({-5, 0, 10, 10}, 100, 100), InvalidBoxError);
}

TEST_CASE("object order switch") {
  const ObjectLayout layout = {{2, {0.6, 0.1, 0.1, 0.1}}, {0, {0.1, 0.5, 0.1, 0.1}},
                               {1, {0.1, 0.1, 0.1, 0.1}}};
  CHECK(apply_object_order(layout, ObjectOrder::Source) == layout);
  const auto by_cat = apply_object_order(layout, ObjectOrder::ByCategory);
  CHECK(by_cat[0].category == 0);
  CHECK(by_cat[2].category == 2);
  const auto by_pos = apply_object_order(layout, ObjectOrder::ByPosition);
  CHECK(by_pos[0].category == 1);
  const auto s1 = apply_object_order(layout, ObjectOrder::Shuffled, 3, 9);
  const auto s2 = apply_object_order(layout, ObjectOrder::Shuffled, 3, 9);
  CHECK(s1 == s2);
  CHECK(parse_object_order("by-position") == ObjectOrder::ByPosition);
  CHECK_THROWS_AS(parse_object_order("random"), ConfigError);
}

TEST_CASE("split") {
  const auto s = split_indices(100, {0.8, 0.1, 0.1}, 4);
  CHECK(s.train.size() == 80);
  CHECK(s.val.size() == 10);
  CHECK(s.test.size() == 10);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 100);
  const auto again = split_indices(100, {0.8, 0.1, 0.1}, 4);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  CHECK(split_indices(100, {0.8, 0.1, 0.1}, 5).train != s.train);
  CHECK_THROWS_AS(split_indices(100, {0.5, 0.6, 0.1}, 0), ConfigError);
}

TEST_CASE("synthetic grammar") {
  const std::vector<RawObject> scene = {{"dog", {0.1, 0.4, 0.2, 0.2}}, {"ball", {0.7, 0.4, 0.1, 0.1}}};
  CHECK(describe_scene(scene).text == "a dog to the left of a ball");
  CHECK(describe_scene(scene).scene_template == SceneTemplate::LeftOf);

  const std::vector<RawObject> dogs = {{"dog", {0.1, 0.4, 0.2, 0.2}}, {"dog", {0.5, 0.1, 0.2, 0.2}}};
  CHECK(describe_scene(dogs).text.find("two dogs") != std::string::npos);

  const std::vector<RawObject> stacked = {{"cat", {0.40, 0.20, 0.2, 0.2}},
                                          {"table", {0.35, 0.41, 0.3, 0.2}}};
  CHECK(describe_scene(stacked).text == "a cat on top of a table");

  const std::vector<RawObject> three = {{"bird", {0.4, 0.1, 0.1, 0.1}},
                                        {"car", {0.4, 0.7, 0.2, 0.2}},
                                        {"tree", {0.8, 0.1, 0.1, 0.1}}};
  CHECK(describe_scene(three).text == "a bird above a car and a tree");
  CHECK(count_phrase("bus", 2) == "two buses");
}

TEST_CASE("synthetic corpus: deterministic, valid and not explained by categories alone") {
  const auto a = generate_synthetic(9, 1000);
  const auto b = generate_synthetic(9, 1000);
  std::ostringstream sa, sb;
  write_dataset(sa, a);
  write_dataset(sb, b);
  CHECK(sa.str() == sb.str());

  std::map<std::multiset<std::string>, std::set<std::string>> by_multiset;
  std::map<std::set<std::string>, std::set<std::string>> by_set;
  for (const auto& ex : a) {
    REQUIRE(!ex.objects.empty());
    REQUIRE(ex.objects.size() <= 4);
    std::multiset<std::string> ms;
    for (const auto& o : ex.objects) {
      CHECK(o.bbox.valid());
      ms.insert(o.category);
    }
    by_multiset[ms].insert(ex.captions.front());
    by_set[std::set<std::string>(ms.begin(), ms.end())].insert(ex.captions.front());
  }
  bool multiset_ambiguous = false;
  for (const auto& [k, captions] : by_multiset) multiset_ambiguous |= captions.size() > 1;
  CHECK(multiset_ambiguous);

  // Same category set with and without a repeated instance.
  bool count_sensitive = false;
  for (const auto& [k, captions] : by_set) {
    bool with_count = false, without_count = false;
    for (const auto& c : captions) {
      const bool counted = c.find("two ") != std::string::npos ||
                           c.find("three ") != std::string::npos ||
                           c.find("four ") != std::string::npos;
      with_count |= counted;
      without_count |= !counted;
    }
    count_sensitive |= with_count && without_count;
  }
  CHECK(count_sensitive);

  SyntheticConfig with_aux;
  with_aux.aux_dim = kSceneTemplateCount;
  const auto aux = generate_synthetic(9, 50, with_aux);
  for (const auto& ex : aux) {
    REQUIRE(ex.aux_features.size() == kSceneTemplateCount);
    double sum = 0.0;
    for (double v : ex.aux_features) sum += v;
    CHECK(sum == 1.0);
    CHECK(ex.aux_features[static_cast<std::size_t>(describe_scene(ex.objects).scene_template)] == 1.0);
  }
  SyntheticConfig bad;
  bad.aux_dim = 3;
  CHECK_THROWS_AS(generate_synthetic(1, 1, bad), ConfigError);
}

TEST_CASE("dataset format round trip and errors") {
  const auto raw = generate_synthetic(2, 20, {});
  std::stringstream s;
  write_dataset(s, raw);
  const std::string first = s.str();
  const auto back = read_dataset(s);
  REQUIRE(back.size() == raw.size());
  std::ostringstream again;
  write_dataset(again, back);
  CHECK(again.str() == first);

  std::istringstream broken("{\"id\": \"x\", \"objects\": 3}\n");
  try {
    read_dataset(broken, "mem");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("mem:1") != std::string::npos);
  }
  std::istringstream bad_box(
      R"({"id":"x","image_size":[1,1],"objects":[{"category":"dog","bbox":[0.9,0,0.5,0.5]}],"captions":["a"]})"
      "\n");
  CHECK_THROWS_AS(read_dataset(bad_box), ParseError);
}

TEST_CASE("encode_example maps names and reports unknown categories") {
  const auto raw = generate_synthetic(2, 30, {});
  const auto cats = build_category_vocabulary(raw);
  std::vector<std::string> captions;
  for (const auto& r : raw) captions.push_back(r.captions.front());
  const auto words = build_vocabulary(captions, 1);
  const auto ex = encode_example(raw[0], words, cats);
  CHECK(ex.layout.size() == raw[0].objects.size());
  CHECK(ex.references == raw[0].captions);
  CHECK(cats.name(ex.layout[0].category) == raw[0].objects[0].category);

  RawExample unknown = raw[0];
  unknown.objects[0].category = "unicorn";
  CHECK_THROWS_AS(encode_example(unknown, words, cats), IndexError);
}

TEST_CASE("coco loader") {
  const std::string instances = R"({
    "images": [{"id": 1, "width": 200, "height": 100}, {"id": 2, "width": 10, "height": 10}],
    "categories": [{"id": 18, "name": "dog"}, {"id": 37, "name": "sports ball"}],
    "annotations": [
      {"id": 5, "image_id": 1, "category_id": 37, "bbox": [50, 25, 100, 50]},
      {"id": 6, "image_id": 1, "category_id": 18, "bbox": [-0.5, 0, 200.9, 100]}
    ]})";
  const std::string captions = R"({
    "annotations": [{"id": 1, "image_id": 1, "caption": "A dog and a ball."},
                    {"id": 2, "image_id": 2, "caption": "Nothing here."}]})";
  std::istringstream in(instances), cap(captions);
  const CocoDataset d = load_coco(in, cap);
  REQUIRE(d.examples.size() == 1);
  CHECK(d.skipped_without_objects == 1);
  const auto& ex = d.examples[0];
  REQUIRE(ex.objects.size() == 2);
  CHECK(ex.objects[0].category == "sports ball");
  CHECK(ex.objects[0].bbox == BoundingBox{0.25, 0.25, 0.5, 0.5});
  CHECK(ex.objects[1].bbox.valid());
  CHECK(d.categories.names() == std::vector<std::string>{"dog", "sports ball"});

  const std::string missing = R"({
    "images": [{"id": 1, "width": 200, "height": 100}],
    "categories": [{"id": 18, "name": "dog"}],
    "annotations": [{"id": 5, "image_id": 7, "category_id": 18, "bbox": [0, 0, 10, 10]}]})";
  std::istringstream in2(missing), cap2(captions);
  try {
    load_coco(in2, cap2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("image_id 7") != std::string::npos);
  }
}
