#pragma once

#include <span>
#include <vector>

namespace nofrills {

/// Axis-aligned box, corner convention x1 < x2, y1 < y2 in continuous pixel
/// coordinates. Construction rejects degenerate boxes, so every live Box has
/// strictly positive area.
struct Box {
  double x1;
  double y1;
  double x2;
  double y2;

  Box(double x1, double y1, double x2, double y2);

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
};

double intersection_area(const Box& a, const Box& b);

/// Intersection over union, symmetric, in [0, 1].
double iou(const Box& a, const Box& b);

struct ScoredBox {
  Box box;
  double score;
};

/// Greedy non-maximum suppression. Boxes are visited in descending-score
/// order (ties broken by ascending original index); a box is kept iff its
/// IoU with every already-kept box is <= threshold. Returns the indices of
/// kept boxes in descending-score order.
std::vector<int> nms(std::span<const ScoredBox> detections, double threshold);

}  // namespace nofrills
