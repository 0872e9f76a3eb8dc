#pragma once

#include "nofrills/dataio.hpp"
#include "nofrills/geometry.hpp"
#include "nofrills/types.hpp"

namespace nofrills {

inline constexpr int kBoxPairRawDim = 21;
inline constexpr int kPoseAbsoluteDim = 3 * PoseSkeleton::kNumKeypoints;  // 54
inline constexpr int kPoseRelativeDim = 5 * PoseSkeleton::kNumKeypoints;  // 90
inline constexpr int kPoseRawDim = kPoseAbsoluteDim + kPoseRelativeDim;   // 144
inline constexpr double kLogEpsilon = 1e-6;

/// Length of an augmented factor input: raw || log(|raw|+eps) || one-hot(|O|).
inline int augmented_dim(int raw_dim, int n_objects) {
  return 2 * raw_dim + n_objects;
}

inline int box_factor_input_dim(int n_objects) {
  return augmented_dim(kBoxPairRawDim, n_objects);
}

inline int pose_factor_input_dim(int n_objects) {
  return augmented_dim(kPoseRawDim, n_objects);
}

/// 21-d box-pair layout encoding, in fixed order:
///   [0..5]   human:  w/W, h/H, cx/W, cy/H, w/h, area/(W*H)
///   [6..11]  object: same six
///   [12..15] relative: (cx_o-cx_h)/w_h, (cy_o-cy_h)/h_h, area_o/area_h, iou
///   [16..20] extended: w_o/w_h, h_o/h_h, inter/area_h, inter/area_o,
///            center distance / sqrt(W*H)
/// Entries 12..20 are invariant to joint translation; the full vector is
/// invariant to uniform scaling of both boxes and the image.
VectorX<double> encode_box_pair(const Box& human, const Box& object,
                                double image_width, double image_height);

struct PoseFeatures {
  VectorX<double> absolute;  // 54: per keypoint (x, y normalized to human box, conf)
  VectorX<double> relative;  // 90: object corner offsets per keypoint + conf
};

/// Pose layout encoding; a missing skeleton yields all-zero features so the
/// pose factor degrades to a learned bias.
PoseFeatures encode_pose(const PoseSkeleton* skeleton, const Box& human,
                         const Box& object);

/// raw || log(|raw| + 1e-6) || one-hot(object). The log channel discards
/// sign; the raw channel keeps it.
VectorX<double> augment(const Eigen::Ref<const VectorX<double>>& raw,
                        int object_index, int n_objects);

}  // namespace nofrills
