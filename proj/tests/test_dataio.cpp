#include <doctest.h>

#include <fstream>
#include <random>

#include "nofrills/checkpoint.hpp"
#include "nofrills/dataio.hpp"
#include "nofrills/synthetic.hpp"
#include "test_util.hpp"

using namespace nofrills;

namespace {

ImageRecord sample_record() {
  ImageRecord r;
  r.image_id = "img_0";
  r.width = 640;
  r.height = 480;
  r.detections.push_back(RawDetection{Box(10, 10, 100, 200), 0, 0.9, 0});
  r.detections.push_back(RawDetection{Box(50, 40, 300, 400), 1, 0.7, 1});
  PoseSkeleton pose{Box(10, 10, 100, 200)};
  for (int k = 0; k < PoseSkeleton::kNumKeypoints; ++k) {
    pose.keypoints[static_cast<std::size_t>(k)] =
        Keypoint{20.0 + k, 30.0 + 2 * k, 0.8};
  }
  r.poses.push_back(pose);
  r.gt_pairs.push_back(GtPair{Box(10, 10, 100, 200), Box(50, 40, 300, 400), 2});
  return r;
}

FeatureTensor small_tensor(int rows, int dim, unsigned seed = 5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  FeatureTensor t;
  t.values.resize(rows, dim);
  for (Eigen::Index i = 0; i < t.values.size(); ++i) {
    t.values.data()[i] = dist(rng);
  }
  return t;
}

}  // namespace

TEST_CASE("feature tensor NFHF1 round-trip is bit-exact") {
  testutil::TempDir dir("nfhf");
  const FeatureTensor t = small_tensor(7, 16);
  save_feature_tensor(dir.path() / "f.bin", t);
  const FeatureTensor back = load_feature_tensor(dir.path() / "f.bin");
  REQUIRE(back.rows() == 7);
  REQUIRE(back.dim() == 16);
  CHECK(std::memcmp(back.values.data(), t.values.data(),
                    sizeof(float) * 7 * 16) == 0);
}

TEST_CASE("empty feature tensor round-trips") {
  testutil::TempDir dir("nfhf_empty");
  FeatureTensor t;
  t.values.resize(0, 32);
  save_feature_tensor(dir.path() / "f.bin", t);
  const FeatureTensor back = load_feature_tensor(dir.path() / "f.bin");
  CHECK(back.rows() == 0);
  CHECK(back.dim() == 32);
}

TEST_CASE("CRC detects a flipped payload byte") {
  testutil::TempDir dir("nfhf_crc");
  const auto path = dir.path() / "f.bin";
  save_feature_tensor(path, small_tensor(4, 8));
  // Flip one byte in the middle of the float payload (header is 13 bytes).
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(13 + 40);
  char c;
  f.read(&c, 1);
  c = static_cast<char>(c ^ 0x10);
  f.seekp(13 + 40);
  f.write(&c, 1);
  f.close();
  CHECK_THROWS_WITH_AS(load_feature_tensor(path),
                       doctest::Contains("checksum"), DataError);
}

TEST_CASE("truncated and corrupt headers are rejected") {
  testutil::TempDir dir("nfhf_bad");
  const auto path = dir.path() / "bad.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE!";
  }
  CHECK_THROWS_AS(load_feature_tensor(path), DataError);
}

TEST_CASE("record JSONL round-trip") {
  testutil::TempDir dir("records");
  const std::vector<ImageRecord> records = {sample_record()};
  save_records(dir.path() / "r.jsonl", records);
  const auto back = load_records(dir.path() / "r.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(record_to_json_line(back[0]) == record_to_json_line(records[0]));
}

TEST_CASE("empty records file loads as an empty dataset") {
  testutil::TempDir dir("records_empty");
  save_records(dir.path() / "r.jsonl", std::vector<ImageRecord>{});
  save_feature_tensor(dir.path() / "f.bin", small_tensor(0, 8));
  const Dataset ds = load_dataset(dir.path() / "r.jsonl", dir.path() / "f.bin",
                                  default_synthetic_taxonomy());
  CHECK(ds.records.empty());
}

TEST_CASE("validation errors name the image and field") {
  const Taxonomy tax = default_synthetic_taxonomy();

  SUBCASE("dangling feature row") {
    ImageRecord r = sample_record();
    r.detections[1].feature_row = 99;
    CHECK_THROWS_WITH_AS(validate_record(r, 2, tax),
                         doctest::Contains("feature_row 99"), DataError);
    CHECK_THROWS_WITH_AS(validate_record(r, 2, tax),
                         doctest::Contains("img_0"), DataError);
  }
  SUBCASE("box outside the image") {
    ImageRecord r = sample_record();
    r.detections[0].box = Box(10, 10, 100, 481);
    CHECK_THROWS_WITH_AS(validate_record(r, 2, tax),
                         doctest::Contains("outside the image"), DataError);
  }
  SUBCASE("bad hoi index") {
    ImageRecord r = sample_record();
    r.gt_pairs[0].hoi = 12;
    CHECK_THROWS_WITH_AS(validate_record(r, 2, tax),
                         doctest::Contains("hoi index 12"), DataError);
  }
  SUBCASE("bad object index") {
    ImageRecord r = sample_record();
    r.detections[0].object = -1;
    CHECK_THROWS_AS(validate_record(r, 2, tax), DataError);
  }
  SUBCASE("score outside [0,1]") {
    ImageRecord r = sample_record();
    r.detections[0].score = 1.5;
    CHECK_THROWS_AS(validate_record(r, 2, tax), DataError);
  }
}

TEST_CASE("fuzzed invalid records are always rejected with a diagnostic") {
  const Taxonomy tax = default_synthetic_taxonomy();
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> which(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    ImageRecord r = sample_record();
    switch (which(rng)) {
      case 0: r.detections[0].feature_row = 2 + trial; break;
      case 1: r.detections[0].object = tax.n_objects() + trial; break;
      case 2: r.gt_pairs[0].hoi = tax.n_classes() + trial; break;
      case 3: r.detections[0].score = 1.0 + 0.01 * (trial + 1); break;
      case 4: r.poses[0].keypoints[3].confidence = 1.5; break;
    }
    CHECK_THROWS_AS(validate_record(r, 2, tax), DataError);
  }
}

TEST_CASE("malformed JSON lines raise parse errors") {
  CHECK_THROWS_AS(record_from_json_line("{not json"), DataError);
  CHECK_THROWS_AS(record_from_json_line(R"({"image_id":"x"})"), DataError);
  CHECK_THROWS_AS(
      record_from_json_line(
          R"({"image_id":"x","width":10,"height":10,"detections":[],
              "poses":[{"box":[0,0,5,5],"keypoints":[[1,2,0.5]]}],
              "gt_pairs":[]})"),
      DataError);
}

TEST_CASE("pose tight box requires two confident keypoints") {
  PoseSkeleton pose{Box(0, 0, 10, 10)};
  CHECK(!pose.tight_confident_box().has_value());
  pose.keypoints[0] = Keypoint{1, 1, 0.9};
  CHECK(!pose.tight_confident_box().has_value());
  pose.keypoints[1] = Keypoint{1, 5, 0.9};  // same x: degenerate width
  CHECK(!pose.tight_confident_box().has_value());
  pose.keypoints[2] = Keypoint{4, 3, 0.5};
  const std::optional<Box> tight = pose.tight_confident_box();
  REQUIRE(tight.has_value());
  CHECK(tight->x1 == 1.0);
  CHECK(tight->y1 == 1.0);
  CHECK(tight->x2 == 4.0);
  CHECK(tight->y2 == 5.0);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  testutil::TempDir dir("ckpt");
  const Taxonomy tax = default_synthetic_taxonomy();
  FactorModel<float> model = FactorModel<float>::make(
      tax, FactorSet{true, true, true, true}, 24, 1234);
  // Perturb running stats so they differ from the initial values.
  auto tensors = model.state_tensors();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> dist(0.5f, 1.5f);
  for (auto& t : tensors) {
    for (Eigen::Index i = 0; i < t.size; ++i) t.data[i] *= dist(rng);
  }

  save_checkpoint(model, tax, dir.path() / "model.json",
                  {{"note", "round-trip"}});
  FactorModel<float> back = load_checkpoint(dir.path() / "model.json", tax);
  auto a = model.state_tensors();
  auto b = back.state_tensors();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    REQUIRE(a[i].size == b[i].size);
    CHECK(std::memcmp(a[i].data, b[i].data,
                      sizeof(float) * static_cast<std::size_t>(a[i].size)) ==
          0);
  }
  CHECK(read_checkpoint_config(dir.path() / "model.json").at("note") ==
        "round-trip");
}

TEST_CASE("empty-parameter (detector-only) checkpoint round-trips") {
  testutil::TempDir dir("ckpt_empty");
  const Taxonomy tax = default_synthetic_taxonomy();
  FactorModel<float> model =
      FactorModel<float>::make(tax, FactorSet::none(), 8, 0);
  save_checkpoint(model, tax, dir.path() / "model.json");
  FactorModel<float> back = load_checkpoint(dir.path() / "model.json", tax);
  CHECK(back.state_tensors().empty());
  CHECK(back.factors() == FactorSet::none());
}

TEST_CASE("checkpoint with wrong |I| is a dimension-mismatch error") {
  testutil::TempDir dir("ckpt_dim");
  const Taxonomy tax = default_synthetic_taxonomy();
  FactorModel<float> model =
      FactorModel<float>::make(tax, FactorSet{false, false, true, false}, 8, 0);
  save_checkpoint(model, tax, dir.path() / "model.json");

  const Taxonomy other =
      Taxonomy({"person", "horse"}, {"ride", "walk"}, {{1, 0}, {1, 1}}, {0, 0});
  CHECK_THROWS_WITH_AS(load_checkpoint(dir.path() / "model.json", other),
                       doctest::Contains("dimension mismatch"), DataError);
}

TEST_CASE("checkpoint taxonomy-hash mismatch is refused") {
  testutil::TempDir dir("ckpt_hash");
  const Taxonomy tax = default_synthetic_taxonomy();
  FactorModel<float> model =
      FactorModel<float>::make(tax, FactorSet{false, false, true, false}, 8, 0);
  save_checkpoint(model, tax, dir.path() / "model.json");
  // Same shape, different train counts: dims match but the hash does not.
  const Taxonomy same_shape = tax.with_train_counts(
      std::vector<long>(static_cast<std::size_t>(tax.n_classes()), 7));
  CHECK_THROWS_WITH_AS(load_checkpoint(dir.path() / "model.json", same_shape),
                       doctest::Contains("hash mismatch"), DataError);
}

TEST_CASE("checkpoint blob corruption trips the checksum") {
  testutil::TempDir dir("ckpt_crc");
  const Taxonomy tax = default_synthetic_taxonomy();
  FactorModel<float> model =
      FactorModel<float>::make(tax, FactorSet{false, false, true, false}, 8, 0);
  save_checkpoint(model, tax, dir.path() / "model.json");
  std::fstream f(dir.path() / "model.bin",
                 std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(13 + 100);
  f.write("\xff", 1);
  f.close();
  CHECK_THROWS_WITH_AS(load_checkpoint(dir.path() / "model.json", tax),
                       doctest::Contains("checksum"), DataError);
}
