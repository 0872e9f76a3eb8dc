#include <doctest.h>

#include "nofrills/synthetic.hpp"
#include "nofrills/taxonomy.hpp"
#include "test_util.hpp"

using namespace nofrills;

namespace {

Taxonomy tiny_taxonomy(std::vector<long> counts = {0, 0, 0, 0, 0, 0}) {
  return Taxonomy({"person", "horse", "cup"}, {"ride", "hold", "watch", "feed"},
                  {{1, 0}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {2, 3}},
                  std::move(counts));
}

// HICO-Det-shaped vocabulary with synthetic names: 80 objects (person first),
// 117 interactions, 600 classes.
Taxonomy paper_shaped_taxonomy() {
  std::vector<std::string> objects = {"person"};
  for (int i = 1; i < 80; ++i) objects.push_back("object_" + std::to_string(i));
  std::vector<std::string> interactions;
  for (int i = 0; i < 117; ++i) {
    interactions.push_back("interaction_" + std::to_string(i));
  }
  std::vector<HoiClass> classes;
  for (int h = 0; h < 600; ++h) {
    classes.push_back({h % 80, (h * 7 + h / 80) % 117});
  }
  std::vector<long> counts;
  for (int h = 0; h < 600; ++h) counts.push_back(h % 25);
  return Taxonomy(objects, interactions, classes, counts);
}

}  // namespace

TEST_CASE("paper-shaped taxonomy dimensions") {
  const Taxonomy t = paper_shaped_taxonomy();
  CHECK(t.n_objects() == 80);
  CHECK(t.n_interactions() == 117);
  CHECK(t.n_classes() == 600);
  CHECK(t.human_object() == 0);
}

TEST_CASE("classes_for_object matches a linear scan") {
  const Taxonomy t = tiny_taxonomy();
  for (int o = 0; o < t.n_objects(); ++o) {
    std::vector<int> expected;
    for (int h = 0; h < t.n_classes(); ++h) {
      if (t.hoi(h).object == o) expected.push_back(h);
    }
    CHECK(t.classes_for_object(o) == expected);
  }
  CHECK(t.classes_for_object(0).empty());  // person has no classes here
  CHECK_THROWS_AS(t.classes_for_object(99), std::out_of_range);
}

TEST_CASE("rare split follows the <10 threshold") {
  SUBCASE("all zero counts -> everything rare") {
    const Taxonomy t = tiny_taxonomy();
    const TaxonomySplit s = t.split();
    CHECK(s.rare == s.full);
    CHECK(s.non_rare.empty());
  }
  SUBCASE("all counts >= 10 -> nothing rare") {
    const Taxonomy t = tiny_taxonomy({10, 11, 12, 13, 14, 15});
    CHECK(t.split().rare.empty());
  }
  SUBCASE("counts = [3, 10, 9] -> rare = {0, 2}") {
    const Taxonomy t =
        Taxonomy({"person", "horse"}, {"ride", "watch", "feed"},
                 {{1, 0}, {1, 1}, {1, 2}}, {3, 10, 9});
    CHECK(t.split().rare == std::vector<int>{0, 2});
    CHECK(t.split().non_rare == std::vector<int>{1});
  }
  SUBCASE("rare and non-rare partition full") {
    const Taxonomy t = paper_shaped_taxonomy();
    const TaxonomySplit s = t.split();
    CHECK(s.rare.size() + s.non_rare.size() == s.full.size());
    for (int h : s.rare) CHECK(t.is_rare(h));
    for (int h : s.non_rare) CHECK(!t.is_rare(h));
  }
}

TEST_CASE("taxonomy validation") {
  CHECK_THROWS_AS(Taxonomy({"a", "a"}, {"x"}, {{0, 0}}, {0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Taxonomy({"a"}, {""}, {{0, 0}}, {0}), std::invalid_argument);
  CHECK_THROWS_AS(Taxonomy({"a"}, {"x"}, {{0, 0}, {0, 0}}, {0, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Taxonomy({"a"}, {"x"}, {{0, 1}}, {0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Taxonomy({"a"}, {"x"}, {{0, 0}}, {0, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Taxonomy({"a"}, {"x"}, {{0, 0}}, {-1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(tiny_taxonomy().hoi(6), std::out_of_range);
}

TEST_CASE("json round-trip preserves the vocabulary and the hash") {
  const Taxonomy t = default_synthetic_taxonomy();
  testutil::TempDir dir("taxonomy");
  t.save(dir.path() / "taxonomy.json");
  const Taxonomy back = Taxonomy::load(dir.path() / "taxonomy.json");
  CHECK(back.objects() == t.objects());
  CHECK(back.interactions() == t.interactions());
  CHECK(back.n_classes() == t.n_classes());
  CHECK(back.content_hash() == t.content_hash());
  CHECK(back.to_json_string() == t.to_json_string());

  const Taxonomy changed = t.with_train_counts(
      std::vector<long>(static_cast<std::size_t>(t.n_classes()), 42));
  CHECK(changed.content_hash() != t.content_hash());
}

TEST_CASE("unknown names in hoi_classes are rejected at load") {
  CHECK_THROWS_AS(Taxonomy::from_json_string(
                      R"({"objects":["person"],"interactions":["ride"],
                          "hoi_classes":[["horse","ride"]],"train_counts":[0]})"),
                  std::invalid_argument);
}

TEST_CASE("human object detection by name") {
  const Taxonomy t =
      Taxonomy({"human", "horse"}, {"ride"}, {{1, 0}}, {0});
  CHECK(t.require_human_object() == 0);
  const Taxonomy none =
      Taxonomy({"cat", "horse"}, {"ride"}, {{1, 0}}, {0});
  CHECK(!none.human_object().has_value());
  CHECK_THROWS_AS(none.require_human_object(), std::invalid_argument);
}
