#pragma once

// Independent reference implementations used to cross-check the library:
// a literal greedy-NMS transcription and an exhaustive-threshold AP
// integrator. These deliberately avoid the library's incremental formulations.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "nofrills/dataio.hpp"
#include "nofrills/evaluator.hpp"
#include "nofrills/geometry.hpp"
#include "test_util.hpp"

namespace nofrills::testutil {

inline std::vector<int> nms_reference(const std::vector<ScoredBox>& dets,
                                      double threshold) {
  std::vector<int> order(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[static_cast<std::size_t>(a)].score >
           dets[static_cast<std::size_t>(b)].score;
  });
  std::vector<int> kept;
  for (int i : order) {
    bool ok = true;
    for (int k : kept) {
      if (iou(dets[static_cast<std::size_t>(i)].box,
              dets[static_cast<std::size_t>(k)].box) > threshold) {
        ok = false;
      }
    }
    if (ok) kept.push_back(i);
  }
  return kept;
}

struct ApInstance {
  std::vector<ApDetection> dets;
  std::vector<std::vector<GtPair>> gt_storage;  // per image
  std::vector<std::string> ids;

  std::vector<std::vector<const GtPair*>> gt_views() const {
    std::vector<std::vector<const GtPair*>> views(gt_storage.size());
    for (std::size_t i = 0; i < gt_storage.size(); ++i) {
      for (const GtPair& g : gt_storage[i]) views[i].push_back(&g);
    }
    return views;
  }
};

/// Exhaustive-threshold AP: for every recall level j/n_gt take the best
/// precision over all rank prefixes reaching it, each prefix re-matched from
/// scratch. Returns -1 when the instance has no ground truth.
inline double ap_oracle(const ApInstance& inst) {
  std::vector<ApDetection> sorted = inst.dets;
  std::sort(sorted.begin(), sorted.end(),
            [](const ApDetection& a, const ApDetection& b) {
              if (a.score != b.score) return a.score > b.score;
              if (*a.image_id != *b.image_id) return *a.image_id < *b.image_id;
              return a.order < b.order;
            });
  long n_gt = 0;
  for (const auto& g : inst.gt_storage) n_gt += static_cast<long>(g.size());
  if (n_gt == 0) return -1.0;

  const auto views = inst.gt_views();
  auto prefix_tp = [&](std::size_t k) {
    std::vector<std::vector<char>> used(views.size());
    for (std::size_t i = 0; i < views.size(); ++i) {
      used[i].assign(views[i].size(), 0);
    }
    long tp = 0;
    for (std::size_t d = 0; d < k; ++d) {
      const ApDetection& det = sorted[d];
      int best = -1;
      double best_min = -1.0;
      const auto& gts = views[static_cast<std::size_t>(det.image)];
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (used[static_cast<std::size_t>(det.image)][g]) continue;
        const double ih = iou(det.human_box, gts[g]->human_box);
        const double io = iou(det.object_box, gts[g]->object_box);
        if (ih > 0.5 && io > 0.5 && std::min(ih, io) > best_min) {
          best_min = std::min(ih, io);
          best = static_cast<int>(g);
        }
      }
      if (best >= 0) {
        used[static_cast<std::size_t>(det.image)][static_cast<std::size_t>(
            best)] = 1;
        ++tp;
      }
    }
    return tp;
  };

  double ap = 0.0;
  for (long j = 1; j <= n_gt; ++j) {
    const double recall = static_cast<double>(j) / static_cast<double>(n_gt);
    double best_precision = 0.0;
    for (std::size_t k = 1; k <= sorted.size(); ++k) {
      const long tp = prefix_tp(k);
      const double r = static_cast<double>(tp) / static_cast<double>(n_gt);
      if (r >= recall) {
        best_precision = std::max(
            best_precision, static_cast<double>(tp) / static_cast<double>(k));
      }
    }
    ap += best_precision / static_cast<double>(n_gt);
  }
  return ap;
}

inline ApInstance fuzz_ap_instance(std::mt19937_64& rng, int max_dets = 50,
                                   int max_gt = 10) {
  ApInstance inst;
  const int n_images = std::uniform_int_distribution<int>(1, 4)(rng);
  inst.gt_storage.resize(static_cast<std::size_t>(n_images));
  inst.ids.reserve(static_cast<std::size_t>(n_images));
  for (int i = 0; i < n_images; ++i) {
    inst.ids.push_back("img_" + std::to_string(i));
  }
  std::uniform_int_distribution<int> gt_count(0, max_gt);
  std::uniform_int_distribution<int> img(0, n_images - 1);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 4);

  const int total_gt = gt_count(rng);
  for (int g = 0; g < total_gt; ++g) {
    const int i = img(rng);
    inst.gt_storage[static_cast<std::size_t>(i)].push_back(
        GtPair{random_box(rng, 100, 8, 30), random_box(rng, 100, 8, 30), 0});
  }
  const int n_dets = std::uniform_int_distribution<int>(0, max_dets)(rng);
  std::vector<int> order_counter(static_cast<std::size_t>(n_images), 0);
  for (int d = 0; d < n_dets; ++d) {
    const int i = img(rng);
    Box human = random_box(rng, 100, 8, 30);
    Box object = random_box(rng, 100, 8, 30);
    if (!inst.gt_storage[static_cast<std::size_t>(i)].empty() &&
        coarse(rng) < 3) {
      const auto& gts = inst.gt_storage[static_cast<std::size_t>(i)];
      const GtPair& gt = gts[static_cast<std::size_t>(
          std::uniform_int_distribution<int>(
              0, static_cast<int>(gts.size()) - 1)(rng))];
      auto jitter = [&](const Box& b) {
        std::uniform_real_distribution<double> eps(-2.0, 2.0);
        const double dx = eps(rng), dy = eps(rng);
        return Box(b.x1 + dx, b.y1 + dy, b.x2 + dx, b.y2 + dy);
      };
      human = jitter(gt.human_box);
      object = jitter(gt.object_box);
    }
    const double s = coarse(rng) == 0 ? coarse(rng) / 4.0 : score(rng);
    inst.dets.push_back(ApDetection{
        s, human, object, i, order_counter[static_cast<std::size_t>(i)]++,
        &inst.ids[static_cast<std::size_t>(i)]});
  }
  return inst;
}

}  // namespace nofrills::testutil
