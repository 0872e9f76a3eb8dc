#include "nofrills/dataio.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace nofrills {

using nlohmann::json;

namespace {

constexpr char kMagic[5] = {'N', 'F', 'H', 'F', '1'};

void put_u32le(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::ifstream& in, const std::string& what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw DataError("NFHF1: truncated " + what);
  }
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint32_t payload_crc(std::span<const float> payload) {
  uLong crc = crc32(0L, Z_NULL, 0);
  if (!payload.empty()) {
    crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data()),
                static_cast<uInt>(payload.size() * sizeof(float)));
  }
  return static_cast<std::uint32_t>(crc);
}

Box box_from_json(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 4) {
    throw DataError(context + ": box must be an array [x1, y1, x2, y2]");
  }
  try {
    return Box(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
               j[3].get<double>());
  } catch (const std::invalid_argument& e) {
    throw DataError(context + ": " + e.what());
  }
}

json box_to_json(const Box& b) {
  return json::array({b.x1, b.y1, b.x2, b.y2});
}

}  // namespace

std::optional<Box> PoseSkeleton::tight_confident_box() const {
  double x1 = std::numeric_limits<double>::infinity();
  double y1 = std::numeric_limits<double>::infinity();
  double x2 = -std::numeric_limits<double>::infinity();
  double y2 = -std::numeric_limits<double>::infinity();
  int confident = 0;
  for (const Keypoint& k : keypoints) {
    if (k.confidence > 0.0) {
      ++confident;
      x1 = std::min(x1, k.x);
      y1 = std::min(y1, k.y);
      x2 = std::max(x2, k.x);
      y2 = std::max(y2, k.y);
    }
  }
  if (confident < 2 || !(x2 > x1) || !(y2 > y1)) return std::nullopt;
  return Box(x1, y1, x2, y2);
}

double PoseSkeleton::total_confidence() const {
  double s = 0.0;
  for (const Keypoint& k : keypoints) s += k.confidence;
  return s;
}

void write_nfhf1(const std::filesystem::path& path,
                 std::span<const float> payload, std::uint32_t rows,
                 std::uint32_t dim) {
  if (static_cast<std::uint64_t>(rows) * dim != payload.size()) {
    throw DataError("NFHF1: payload size does not match rows*dim");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("NFHF1: cannot write " + path.string());
  }
  out.write(kMagic, sizeof(kMagic));
  put_u32le(out, rows);
  put_u32le(out, dim);
  if (!payload.empty()) {
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
  }
  put_u32le(out, payload_crc(payload));
  if (!out) {
    throw DataError("NFHF1: write failed for " + path.string());
  }
}

FeatureTensor read_nfhf1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("NFHF1: cannot open " + path.string());
  }
  char magic[5];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("NFHF1: bad magic in " + path.string());
  }
  const std::uint32_t rows = get_u32le(in, "row count");
  const std::uint32_t dim = get_u32le(in, "dim");
  FeatureTensor t;
  t.values.resize(rows, dim);
  const std::uint64_t n = static_cast<std::uint64_t>(rows) * dim;
  if (n > 0 &&
      !in.read(reinterpret_cast<char*>(t.values.data()),
               static_cast<std::streamsize>(n * sizeof(float)))) {
    throw DataError("NFHF1: truncated payload in " + path.string());
  }
  const std::uint32_t stored = get_u32le(in, "checksum");
  const std::uint32_t actual =
      payload_crc(std::span<const float>(t.values.data(), n));
  if (stored != actual) {
    throw DataError("NFHF1: checksum mismatch in " + path.string() +
                    " (payload corrupted)");
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!std::isfinite(t.values.data()[i])) {
      throw DataError("NFHF1: non-finite value at flat index " +
                      std::to_string(i) + " in " + path.string());
    }
  }
  return t;
}

void save_feature_tensor(const std::filesystem::path& path,
                         const FeatureTensor& tensor) {
  write_nfhf1(path,
              std::span<const float>(tensor.values.data(),
                                     static_cast<std::size_t>(
                                         tensor.values.size())),
              static_cast<std::uint32_t>(tensor.rows()),
              static_cast<std::uint32_t>(tensor.dim()));
}

FeatureTensor load_feature_tensor(const std::filesystem::path& path) {
  return read_nfhf1(path);
}

std::string record_to_json_line(const ImageRecord& record) {
  json j;
  j["image_id"] = record.image_id;
  j["width"] = record.width;
  j["height"] = record.height;
  json dets = json::array();
  for (const RawDetection& d : record.detections) {
    dets.push_back({{"box", box_to_json(d.box)},
                    {"object", d.object},
                    {"score", d.score},
                    {"feature_row", d.feature_row}});
  }
  j["detections"] = dets;
  json poses = json::array();
  for (const PoseSkeleton& p : record.poses) {
    json kps = json::array();
    for (const Keypoint& k : p.keypoints) {
      kps.push_back(json::array({k.x, k.y, k.confidence}));
    }
    poses.push_back({{"box", box_to_json(p.anchor)}, {"keypoints", kps}});
  }
  j["poses"] = poses;
  json gts = json::array();
  for (const GtPair& g : record.gt_pairs) {
    gts.push_back({{"human_box", box_to_json(g.human_box)},
                   {"object_box", box_to_json(g.object_box)},
                   {"hoi", g.hoi}});
  }
  j["gt_pairs"] = gts;
  return j.dump();
}

ImageRecord record_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("record: invalid JSON: ") + e.what());
  }
  ImageRecord r;
  try {
    r.image_id = j.at("image_id").get<std::string>();
    r.width = j.at("width").get<double>();
    r.height = j.at("height").get<double>();
    const std::string ctx = "record '" + r.image_id + "'";
    for (const json& d : j.at("detections")) {
      RawDetection det{box_from_json(d.at("box"), ctx + " detections.box"),
                       d.at("object").get<int>(), d.at("score").get<double>(),
                       d.at("feature_row").get<int>()};
      r.detections.push_back(det);
    }
    for (const json& p : j.at("poses")) {
      PoseSkeleton pose(box_from_json(p.at("box"), ctx + " poses.box"));
      const json& kps = p.at("keypoints");
      if (!kps.is_array() || kps.size() != PoseSkeleton::kNumKeypoints) {
        throw DataError(ctx + ": poses.keypoints must hold exactly 18 "
                              "[x, y, conf] triples");
      }
      for (int i = 0; i < PoseSkeleton::kNumKeypoints; ++i) {
        const json& k = kps[i];
        if (!k.is_array() || k.size() != 3) {
          throw DataError(ctx + ": keypoint " + std::to_string(i) +
                          " must be [x, y, conf]");
        }
        pose.keypoints[static_cast<std::size_t>(i)] =
            Keypoint{k[0].get<double>(), k[1].get<double>(),
                     k[2].get<double>()};
      }
      r.poses.push_back(pose);
    }
    for (const json& g : j.at("gt_pairs")) {
      GtPair gt{box_from_json(g.at("human_box"), ctx + " gt_pairs.human_box"),
                box_from_json(g.at("object_box"), ctx + " gt_pairs.object_box"),
                g.at("hoi").get<int>()};
      r.gt_pairs.push_back(gt);
    }
  } catch (const json::exception& e) {
    throw DataError("record '" + r.image_id + "': " + e.what());
  }
  return r;
}

void save_records(const std::filesystem::path& path,
                  std::span<const ImageRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("records: cannot write " + path.string());
  }
  for (const ImageRecord& r : records) {
    out << record_to_json_line(r) << '\n';
  }
}

std::vector<ImageRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("records: cannot open " + path.string());
  }
  std::vector<ImageRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json_line(line));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

void validate_record(const ImageRecord& record, int feature_rows,
                     const Taxonomy& taxonomy) {
  const std::string ctx = "record '" + record.image_id + "'";
  if (record.image_id.empty()) {
    throw DataError("record with empty image_id");
  }
  if (!(record.width > 0.0) || !(record.height > 0.0)) {
    throw DataError(ctx + ": width/height must be positive");
  }
  auto in_image = [&](const Box& b) {
    return b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= record.width &&
           b.y2 <= record.height;
  };
  for (std::size_t i = 0; i < record.detections.size(); ++i) {
    const RawDetection& d = record.detections[i];
    const std::string field = ctx + " detections[" + std::to_string(i) + "]";
    if (!in_image(d.box)) {
      throw DataError(field + ".box lies outside the image bounds");
    }
    if (d.object < 0 || d.object >= taxonomy.n_objects()) {
      throw DataError(field + ".object index " + std::to_string(d.object) +
                      " is out of range");
    }
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw DataError(field + ".score must lie in [0, 1]");
    }
    if (d.feature_row < 0 || d.feature_row >= feature_rows) {
      throw DataError(field + ".feature_row " + std::to_string(d.feature_row) +
                      " is not a valid row (tensor has " +
                      std::to_string(feature_rows) + " rows)");
    }
  }
  for (std::size_t i = 0; i < record.poses.size(); ++i) {
    const PoseSkeleton& p = record.poses[i];
    const std::string field = ctx + " poses[" + std::to_string(i) + "]";
    if (!in_image(p.anchor)) {
      throw DataError(field + ".box lies outside the image bounds");
    }
    for (const Keypoint& k : p.keypoints) {
      if (!(k.confidence >= 0.0 && k.confidence <= 1.0)) {
        throw DataError(field + ": keypoint confidence must lie in [0, 1]");
      }
      if (!std::isfinite(k.x) || !std::isfinite(k.y)) {
        throw DataError(field + ": keypoint coordinates must be finite");
      }
    }
  }
  for (std::size_t i = 0; i < record.gt_pairs.size(); ++i) {
    const GtPair& g = record.gt_pairs[i];
    const std::string field = ctx + " gt_pairs[" + std::to_string(i) + "]";
    if (!in_image(g.human_box) || !in_image(g.object_box)) {
      throw DataError(field + ": box lies outside the image bounds");
    }
    if (g.hoi < 0 || g.hoi >= taxonomy.n_classes()) {
      throw DataError(field + ".hoi index " + std::to_string(g.hoi) +
                      " is out of range");
    }
  }
}

Dataset load_dataset(const std::filesystem::path& records_path,
                     const std::filesystem::path& features_path,
                     const Taxonomy& taxonomy) {
  Dataset ds;
  ds.features = load_feature_tensor(features_path);
  ds.records = load_records(records_path);
  for (const ImageRecord& r : ds.records) {
    validate_record(r, ds.features.rows(), taxonomy);
  }
  return ds;
}

}  // namespace nofrills
