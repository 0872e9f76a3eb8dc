#include "nofrills/candidates.hpp"

#include <algorithm>

namespace nofrills {

std::optional<PoseSkeleton> assign_pose(
    const Box& human_box, std::span<const PoseSkeleton> skeletons) {
  const PoseSkeleton* best = nullptr;
  double best_ratio = 0.0;
  double best_conf = 0.0;
  for (const PoseSkeleton& s : skeletons) {
    const std::optional<Box> tight = s.tight_confident_box();
    if (!tight) continue;
    const double ratio = intersection_area(*tight, human_box) / tight->area();
    if (ratio < kPoseCoverageThreshold) continue;
    const double conf = s.total_confidence();
    if (best == nullptr || ratio > best_ratio ||
        (ratio == best_ratio && conf > best_conf)) {
      best = &s;
      best_ratio = ratio;
      best_conf = conf;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

CandidateSet build_candidates(const ImageRecord& record,
                              const Taxonomy& taxonomy,
                              const CandidateParams& params) {
  CandidateSet set;
  set.per_object.resize(static_cast<std::size_t>(taxonomy.n_objects()));
  const std::optional<int> human = taxonomy.human_object();

  for (int o = 0; o < taxonomy.n_objects(); ++o) {
    std::vector<int> det_indices;
    std::vector<ScoredBox> scored;
    for (int i = 0; i < static_cast<int>(record.detections.size()); ++i) {
      const RawDetection& d = record.detections[static_cast<std::size_t>(i)];
      if (d.object != o) continue;
      det_indices.push_back(i);
      scored.push_back({d.box, d.score});
    }
    // NMS first, then score threshold, then top-k.
    const std::vector<int> kept = nms(scored, params.nms_threshold);
    std::vector<Candidate>& out = set.per_object[static_cast<std::size_t>(o)];
    for (int k : kept) {
      if (static_cast<int>(out.size()) >= params.max_per_class) break;
      const RawDetection& d =
          record.detections[static_cast<std::size_t>(det_indices[k])];
      if (!(d.score > params.score_threshold)) continue;
      Candidate c{det_indices[static_cast<std::size_t>(k)], d.box, d.score,
                  d.feature_row, std::nullopt};
      if (human && o == *human) {
        c.pose = assign_pose(d.box, record.poses);
      }
      out.push_back(std::move(c));
    }
  }
  return set;
}

}  // namespace nofrills
