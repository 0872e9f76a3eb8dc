#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nofrills/dataio.hpp"
#include "nofrills/factor_model.hpp"
#include "nofrills/taxonomy.hpp"

namespace nofrills {

/// IoU both boxes must exceed (strictly) for a detection to match a GT pair.
inline constexpr double kMatchIouThreshold = 0.5;

struct ApDetection {
  double score;
  Box human_box;
  Box object_box;
  int image;                   // index into the evaluation image list
  int order;                   // insertion order within the image
  const std::string* image_id; // tie-break key
};

/// Greedy matching + all-point interpolated AP for one class. Detections are
/// ranked by descending score (ties: image_id, then insertion order); each is
/// a true positive iff both boxes exceed IoU 0.5 against a not-yet-matched GT
/// pair of the same image, taking the GT that maximizes min(iou_h, iou_o).
/// Returns nullopt when the class has no ground truth.
std::optional<double> match_and_ap(
    std::vector<ApDetection> detections,
    const std::vector<std::vector<const GtPair*>>& gt_by_image);

struct EvalResult {
  std::vector<std::optional<double>> per_class_ap;  // absent: no GT
  std::vector<int> gt_counts;
  std::optional<double> map_full;
  std::optional<double> map_rare;
  std::optional<double> map_nonrare;
};

/// Per-class AP over all images, then means over the full / rare / non-rare
/// class subsets restricted to classes with at least one GT instance.
EvalResult evaluate(std::span<const ImageRecord> records,
                    std::span<const std::vector<PairScore>> scores_per_image,
                    const Taxonomy& taxonomy);

/// CSV report: one row per class (name, object, interaction, ap, #gt) plus
/// summary rows for the three mAP aggregates.
void write_eval_report(const std::filesystem::path& path,
                       const EvalResult& result, const Taxonomy& taxonomy);

}  // namespace nofrills
