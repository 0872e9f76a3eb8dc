#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nofrills/geometry.hpp"
#include "nofrills/taxonomy.hpp"
#include "nofrills/types.hpp"

namespace nofrills {

/// Raised on malformed records, dangling references, checksum failures and
/// other ingest problems. Messages name the offending image/field.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;  // 0 marks an undetected keypoint
};

struct PoseSkeleton {
  static constexpr int kNumKeypoints = 18;

  Box anchor;
  std::array<Keypoint, kNumKeypoints> keypoints{};

  explicit PoseSkeleton(Box anchor_box) : anchor(anchor_box) {}

  /// Tight bounding box of keypoints with confidence > 0. Empty when fewer
  /// than two confident keypoints exist or when the tight box is degenerate
  /// (zero width or height), in which case the skeleton is ineligible for
  /// pose assignment.
  std::optional<Box> tight_confident_box() const;

  double total_confidence() const;
};

struct RawDetection {
  Box box;
  int object = 0;
  double score = 0.0;
  int feature_row = 0;
};

struct GtPair {
  Box human_box;
  Box object_box;
  int hoi = 0;
};

struct ImageRecord {
  std::string image_id;
  double width = 0.0;
  double height = 0.0;
  std::vector<RawDetection> detections;
  std::vector<PoseSkeleton> poses;
  std::vector<GtPair> gt_pairs;
};

/// Dense row-major float32 matrix backing appearance features. For real fc7
/// ingestion dim is 2048; synthetic datasets may use a smaller dim carried in
/// the file header.
struct FeatureTensor {
  RowMatrixX<float> values;

  int rows() const { return static_cast<int>(values.rows()); }
  int dim() const { return static_cast<int>(values.cols()); }
};

/// NFHF1 binary blob: magic "NFHF1", u32le rows, u32le dim, rows*dim float32
/// little-endian payload, u32le CRC32 of the payload bytes.
void write_nfhf1(const std::filesystem::path& path,
                 std::span<const float> payload, std::uint32_t rows,
                 std::uint32_t dim);
FeatureTensor read_nfhf1(const std::filesystem::path& path);

void save_feature_tensor(const std::filesystem::path& path,
                         const FeatureTensor& tensor);
FeatureTensor load_feature_tensor(const std::filesystem::path& path);

/// JSON Lines record serialization, one image per line.
std::string record_to_json_line(const ImageRecord& record);
ImageRecord record_from_json_line(const std::string& line);
void save_records(const std::filesystem::path& path,
                  std::span<const ImageRecord> records);
std::vector<ImageRecord> load_records(const std::filesystem::path& path);

struct Dataset {
  std::vector<ImageRecord> records;
  FeatureTensor features;
};

/// Loads and cross-validates records against the feature tensor and the
/// taxonomy; any invariant violation raises DataError naming the image and
/// field.
Dataset load_dataset(const std::filesystem::path& records_path,
                     const std::filesystem::path& features_path,
                     const Taxonomy& taxonomy);

/// Validation used by load_dataset, exposed for fuzz tests.
void validate_record(const ImageRecord& record, int feature_rows,
                     const Taxonomy& taxonomy);

}  // namespace nofrills
