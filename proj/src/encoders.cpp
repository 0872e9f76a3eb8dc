#include "nofrills/encoders.hpp"

#include <cmath>
#include <stdexcept>

namespace nofrills {

VectorX<double> encode_box_pair(const Box& human, const Box& object,
                                double image_width, double image_height) {
  if (!(image_width > 0.0) || !(image_height > 0.0)) {
    throw std::invalid_argument("encode_box_pair: image dimensions must be "
                                "positive");
  }
  const double W = image_width;
  const double H = image_height;
  VectorX<double> f(kBoxPairRawDim);
  int i = 0;
  for (const Box* b : {&human, &object}) {
    f[i++] = b->width() / W;
    f[i++] = b->height() / H;
    f[i++] = b->center_x() / W;
    f[i++] = b->center_y() / H;
    f[i++] = b->width() / b->height();
    f[i++] = b->area() / (W * H);
  }
  const double inter = intersection_area(human, object);
  f[i++] = (object.center_x() - human.center_x()) / human.width();
  f[i++] = (object.center_y() - human.center_y()) / human.height();
  f[i++] = object.area() / human.area();
  f[i++] = iou(human, object);
  f[i++] = object.width() / human.width();
  f[i++] = object.height() / human.height();
  f[i++] = inter / human.area();
  f[i++] = inter / object.area();
  const double dx = object.center_x() - human.center_x();
  const double dy = object.center_y() - human.center_y();
  f[i++] = std::sqrt(dx * dx + dy * dy) / std::sqrt(W * H);
  return f;
}

PoseFeatures encode_pose(const PoseSkeleton* skeleton, const Box& human,
                         const Box& object) {
  PoseFeatures out;
  out.absolute = VectorX<double>::Zero(kPoseAbsoluteDim);
  out.relative = VectorX<double>::Zero(kPoseRelativeDim);
  if (skeleton == nullptr) return out;
  const double wh = human.width();
  const double hh = human.height();
  for (int k = 0; k < PoseSkeleton::kNumKeypoints; ++k) {
    const Keypoint& kp = skeleton->keypoints[static_cast<std::size_t>(k)];
    out.absolute[3 * k + 0] = (kp.x - human.x1) / wh;
    out.absolute[3 * k + 1] = (kp.y - human.y1) / hh;
    out.absolute[3 * k + 2] = kp.confidence;
    out.relative[5 * k + 0] = (object.x1 - kp.x) / wh;
    out.relative[5 * k + 1] = (object.y1 - kp.y) / hh;
    out.relative[5 * k + 2] = (object.x2 - kp.x) / wh;
    out.relative[5 * k + 3] = (object.y2 - kp.y) / hh;
    out.relative[5 * k + 4] = kp.confidence;
  }
  return out;
}

VectorX<double> augment(const Eigen::Ref<const VectorX<double>>& raw,
                        int object_index, int n_objects) {
  if (object_index < 0 || object_index >= n_objects) {
    throw std::invalid_argument("augment: object index out of range");
  }
  const Eigen::Index d = raw.size();
  VectorX<double> out = VectorX<double>::Zero(2 * d + n_objects);
  out.head(d) = raw;
  out.segment(d, d) = (raw.array().abs() + kLogEpsilon).log();
  out[2 * d + object_index] = 1.0;
  return out;
}

}  // namespace nofrills
