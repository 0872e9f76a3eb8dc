#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nofrills/dataio.hpp"
#include "nofrills/geometry.hpp"
#include "nofrills/taxonomy.hpp"

namespace nofrills {

/// Minimum fraction of a skeleton's tight keypoint box that must lie inside a
/// human candidate box for the skeleton to be assignable.
inline constexpr double kPoseCoverageThreshold = 0.70;

struct CandidateParams {
  double nms_threshold = 0.3;
  double score_threshold = 0.01;
  int max_per_class = 10;
};

struct Candidate {
  int det_index;  // index into ImageRecord::detections
  Box box;
  double score;
  int feature_row;
  std::optional<PoseSkeleton> pose;  // human candidates only
};

/// Per-object-class candidate lists, each sorted by descending score,
/// NMS-antichain at the configured threshold, truncated to max_per_class.
struct CandidateSet {
  std::vector<std::vector<Candidate>> per_object;

  const std::vector<Candidate>& for_object(int o) const {
    return per_object.at(static_cast<std::size_t>(o));
  }
};

/// Stage-1 candidate construction: per class, apply NMS, drop scores at or
/// below the threshold, keep the top max_per_class by descending score. Human
/// candidates additionally get a pose skeleton assigned when one qualifies.
CandidateSet build_candidates(const ImageRecord& record,
                              const Taxonomy& taxonomy,
                              const CandidateParams& params = {});

/// Assigns the pose skeleton whose confident-keypoint tight box has the
/// largest inside-fraction >= kPoseCoverageThreshold relative to the human
/// box; ties broken by larger summed confidence. Returns nullopt when no
/// skeleton qualifies.
std::optional<PoseSkeleton> assign_pose(
    const Box& human_box, std::span<const PoseSkeleton> skeletons);

}  // namespace nofrills
