#include "nofrills/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nofrills {

Box::Box(double x1, double y1, double x2, double y2)
    : x1(x1), y1(y1), x2(x2), y2(y2) {
  if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
        std::isfinite(y2)) ||
      !(x2 > x1) || !(y2 > y1)) {
    throw std::invalid_argument(
        "invalid box [" + std::to_string(x1) + ", " + std::to_string(y1) +
        ", " + std::to_string(x2) + ", " + std::to_string(y2) +
        "]: requires finite coordinates with x2 > x1 and y2 > y1");
  }
}

double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

std::vector<int> nms(std::span<const ScoredBox> detections, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("nms threshold must lie in [0, 1]");
  }
  for (const ScoredBox& d : detections) {
    if (!std::isfinite(d.score)) {
      throw std::invalid_argument("nms requires finite scores");
    }
  }

  std::vector<int> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (detections[a].score != detections[b].score) {
      return detections[a].score > detections[b].score;
    }
    return a < b;  // equal scores: lower original index wins
  });

  std::vector<int> kept;
  kept.reserve(detections.size());
  for (int idx : order) {
    bool suppressed = false;
    for (int k : kept) {
      if (iou(detections[idx].box, detections[k].box) > threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(idx);
  }
  return kept;
}

}  // namespace nofrills
