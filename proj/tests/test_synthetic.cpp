#include <doctest.h>

#include <fstream>
#include <sstream>

#include "nofrills/evaluator.hpp"
#include "nofrills/synthetic.hpp"
#include "nofrills/trainer.hpp"
#include "test_util.hpp"

using namespace nofrills;

namespace {

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SyntheticConfig small_config() {
  SyntheticConfig cfg;
  cfg.train_images = 30;
  cfg.val_images = 5;
  cfg.test_images = 10;
  cfg.appearance_dim = 16;
  return cfg;
}

}  // namespace

TEST_CASE("generation is a pure function of (config, seed)") {
  const Taxonomy tax = default_synthetic_taxonomy();
  const SyntheticConfig cfg = small_config();
  testutil::TempDir a("gen_a"), b("gen_b");
  write_synthetic_dataset(a.path(), generate_synthetic(cfg, tax, 42));
  write_synthetic_dataset(b.path(), generate_synthetic(cfg, tax, 42));
  for (const char* rel :
       {"taxonomy.json", "train/records.jsonl", "train/features.bin",
        "val/records.jsonl", "val/features.bin", "test/records.jsonl",
        "test/features.bin"}) {
    CHECK(file_bytes(a.path() / rel) == file_bytes(b.path() / rel));
  }
  // a different seed changes the data
  write_synthetic_dataset(b.path(), generate_synthetic(cfg, tax, 43));
  CHECK(file_bytes(a.path() / "train/records.jsonl") !=
        file_bytes(b.path() / "train/records.jsonl"));
}

TEST_CASE("zero images produce an empty dataset") {
  SyntheticConfig cfg;
  cfg.appearance_dim = 8;
  const SyntheticDataset ds =
      generate_synthetic(cfg, default_synthetic_taxonomy(), 1);
  CHECK(ds.train.records.empty());
  CHECK(ds.train.features.rows() == 0);
  CHECK(ds.test.records.empty());
}

TEST_CASE("config validation") {
  SyntheticConfig cfg = small_config();
  cfg.appearance_dim = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg, default_synthetic_taxonomy(), 1),
                  std::invalid_argument);
  cfg = small_config();
  cfg.designated_rare_classes = 99;
  CHECK_THROWS_AS(generate_synthetic(cfg, default_synthetic_taxonomy(), 1),
                  std::invalid_argument);
  cfg = small_config();
  cfg.min_instances = 3;
  cfg.max_instances = 1;
  CHECK_THROWS_AS(generate_synthetic(cfg, default_synthetic_taxonomy(), 1),
                  std::invalid_argument);
  // taxonomy without a person object cannot form pairs
  const Taxonomy no_person =
      Taxonomy({"cat", "horse"}, {"ride"}, {{1, 0}}, {0});
  CHECK_THROWS_AS(generate_synthetic(small_config(), no_person, 1),
                  std::invalid_argument);
}

TEST_CASE("generated records load back through the validating path") {
  const SyntheticConfig cfg = small_config();
  const SyntheticDataset ds =
      generate_synthetic(cfg, default_synthetic_taxonomy(), 7);
  testutil::TempDir dir("gen_load");
  write_synthetic_dataset(dir.path(), ds);
  const Taxonomy tax = Taxonomy::load(dir.path() / "taxonomy.json");
  const Dataset train = load_dataset(dir.path() / "train/records.jsonl",
                                     dir.path() / "train/features.bin", tax);
  CHECK(train.records.size() == 30);
  CHECK(train.features.dim() == 16);
  for (const ImageRecord& r : train.records) {
    CHECK(!r.gt_pairs.empty());
    CHECK(r.detections.size() >=
          r.gt_pairs.size() * 2 + static_cast<std::size_t>(
                                      cfg.distractors_per_image));
  }
}

TEST_CASE("train counts reflect the generated train split") {
  const SyntheticConfig cfg = small_config();
  const SyntheticDataset ds =
      generate_synthetic(cfg, default_synthetic_taxonomy(), 7);
  long total = 0;
  for (long c : ds.taxonomy.train_counts()) total += c;
  long gt_total = 0;
  for (const ImageRecord& r : ds.train.records) {
    gt_total += static_cast<long>(r.gt_pairs.size());
  }
  CHECK(total == gt_total);
  CHECK(total >= 30);
}

TEST_CASE("designated rare classes stay under the rare threshold") {
  SyntheticConfig cfg = small_config();
  cfg.train_images = 400;
  const SyntheticDataset ds =
      generate_synthetic(cfg, default_synthetic_taxonomy(), 11);
  const int n = ds.taxonomy.n_classes();
  CHECK(ds.taxonomy.train_counts()[static_cast<std::size_t>(n - 1)] <
        kRareThreshold);
  CHECK(ds.taxonomy.train_counts()[static_cast<std::size_t>(n - 2)] <
        kRareThreshold);
  long common_min = std::numeric_limits<long>::max();
  for (int h = 0; h < n - 2; ++h) {
    common_min = std::min(
        common_min, ds.taxonomy.train_counts()[static_cast<std::size_t>(h)]);
  }
  CHECK(common_min >= kRareThreshold);
}

TEST_CASE("latent-rule oracle achieves mAP >= 0.95 on generated scenes") {
  SyntheticConfig cfg;
  cfg.train_images = 40;  // only used for the rare-weight calibration
  cfg.test_images = 120;
  cfg.appearance_dim = 16;
  const SyntheticDataset ds =
      generate_synthetic(cfg, default_synthetic_taxonomy(), 20260810);

  std::vector<std::vector<PairScore>> scores;
  scores.reserve(ds.test.records.size());
  for (const ImageRecord& rec : ds.test.records) {
    const CandidateSet cands = build_candidates(rec, ds.taxonomy);
    scores.push_back(oracle_score_image(ds.latents, ds.taxonomy, rec, cands,
                                        ds.test.features));
  }
  const EvalResult r = evaluate(ds.test.records, scores, ds.taxonomy);
  REQUIRE(r.map_full.has_value());
  INFO("oracle mAP = ", *r.map_full);
  CHECK(*r.map_full >= 0.95);
}

TEST_CASE("pose templates stay inside the unit box and vary by archetype") {
  for (int i = 0; i < 6; ++i) {
    const auto t = pose_template(i);
    CHECK((t.array() >= 0.0).all());
    CHECK((t.array() <= 1.0).all());
  }
  CHECK(pose_template(0) != pose_template(3));
}
