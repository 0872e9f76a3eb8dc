#include "nofrills/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace nofrills {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::optional<double> mean_over(const std::vector<int>& classes,
                                const EvalResult& r) {
  double sum = 0.0;
  int n = 0;
  for (int h : classes) {
    if (r.per_class_ap[static_cast<std::size_t>(h)]) {
      sum += *r.per_class_ap[static_cast<std::size_t>(h)];
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace

std::optional<double> match_and_ap(
    std::vector<ApDetection> detections,
    const std::vector<std::vector<const GtPair*>>& gt_by_image) {
  long n_gt = 0;
  for (const auto& g : gt_by_image) n_gt += static_cast<long>(g.size());
  if (n_gt == 0) return std::nullopt;

  for (const ApDetection& d : detections) {
    if (!std::isfinite(d.score)) {
      throw std::invalid_argument("match_and_ap: non-finite detection score");
    }
  }
  std::sort(detections.begin(), detections.end(),
            [](const ApDetection& a, const ApDetection& b) {
              if (a.score != b.score) return a.score > b.score;
              if (*a.image_id != *b.image_id) return *a.image_id < *b.image_id;
              return a.order < b.order;
            });

  std::vector<std::vector<char>> matched(gt_by_image.size());
  for (std::size_t i = 0; i < gt_by_image.size(); ++i) {
    matched[i].assign(gt_by_image[i].size(), 0);
  }

  const std::size_t n = detections.size();
  std::vector<char> is_tp(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const ApDetection& d = detections[k];
    const auto& gts = gt_by_image[static_cast<std::size_t>(d.image)];
    int best = -1;
    double best_min_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (matched[static_cast<std::size_t>(d.image)][g]) continue;
      const double ih = iou(d.human_box, gts[g]->human_box);
      if (!(ih > kMatchIouThreshold)) continue;
      const double io = iou(d.object_box, gts[g]->object_box);
      if (!(io > kMatchIouThreshold)) continue;
      const double m = std::min(ih, io);
      if (m > best_min_iou) {  // ties keep the earlier GT
        best_min_iou = m;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      matched[static_cast<std::size_t>(d.image)][static_cast<std::size_t>(
          best)] = 1;
      is_tp[k] = 1;
    }
  }

  // Precision envelope (all-point interpolation).
  std::vector<double> precision(n);
  long tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (is_tp[k]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  double env = 0.0;
  double ap = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    env = std::max(env, precision[k]);
    if (is_tp[k]) ap += env / static_cast<double>(n_gt);
  }
  return ap;
}

EvalResult evaluate(std::span<const ImageRecord> records,
                    std::span<const std::vector<PairScore>> scores_per_image,
                    const Taxonomy& taxonomy) {
  if (records.size() != scores_per_image.size()) {
    throw std::invalid_argument(
        "evaluate: records and score lists must align");
  }
  const int n_classes = taxonomy.n_classes();
  std::vector<std::vector<ApDetection>> dets(
      static_cast<std::size_t>(n_classes));
  std::vector<std::vector<std::vector<const GtPair*>>> gts(
      static_cast<std::size_t>(n_classes));
  for (auto& g : gts) g.resize(records.size());

  for (std::size_t img = 0; img < records.size(); ++img) {
    for (const GtPair& g : records[img].gt_pairs) {
      gts[static_cast<std::size_t>(g.hoi)][img].push_back(&g);
    }
    int order = 0;
    for (const PairScore& s : scores_per_image[img]) {
      if (s.hoi < 0 || s.hoi >= n_classes) {
        throw std::invalid_argument(
            "evaluate: score references hoi class " + std::to_string(s.hoi) +
            " outside the taxonomy (mismatched taxonomy?)");
      }
      dets[static_cast<std::size_t>(s.hoi)].push_back(
          ApDetection{s.p_final, s.human_box, s.object_box,
                      static_cast<int>(img), order, &records[img].image_id});
      ++order;
    }
  }

  EvalResult result;
  result.per_class_ap.resize(static_cast<std::size_t>(n_classes));
  result.gt_counts.assign(static_cast<std::size_t>(n_classes), 0);
  for (int h = 0; h < n_classes; ++h) {
    long cnt = 0;
    for (const auto& g : gts[static_cast<std::size_t>(h)]) {
      cnt += static_cast<long>(g.size());
    }
    result.gt_counts[static_cast<std::size_t>(h)] = static_cast<int>(cnt);
    result.per_class_ap[static_cast<std::size_t>(h)] = match_and_ap(
        std::move(dets[static_cast<std::size_t>(h)]),
        gts[static_cast<std::size_t>(h)]);
  }

  const TaxonomySplit split = taxonomy.split();
  result.map_full = mean_over(split.full, result);
  result.map_rare = mean_over(split.rare, result);
  result.map_nonrare = mean_over(split.non_rare, result);
  return result;
}

void write_eval_report(const std::filesystem::path& path,
                       const EvalResult& result, const Taxonomy& taxonomy) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("eval report: cannot write " + path.string());
  }
  out << "class,object,interaction,ap,num_gt\n";
  for (int h = 0; h < taxonomy.n_classes(); ++h) {
    const HoiClass& c = taxonomy.hoi(h);
    const std::string& obj = taxonomy.objects()[static_cast<std::size_t>(
        c.object)];
    const std::string& inter =
        taxonomy.interactions()[static_cast<std::size_t>(c.interaction)];
    out << obj << ':' << inter << ',' << obj << ',' << inter << ',';
    if (result.per_class_ap[static_cast<std::size_t>(h)]) {
      out << fmt_double(*result.per_class_ap[static_cast<std::size_t>(h)]);
    } else {
      out << "NA";
    }
    out << ',' << result.gt_counts[static_cast<std::size_t>(h)] << '\n';
  }
  auto summary = [&](const char* name, const std::optional<double>& v) {
    out << name << ",,,";
    if (v) {
      out << fmt_double(*v);
    } else {
      out << "NA";
    }
    out << ",\n";
  };
  summary("__full__", result.map_full);
  summary("__rare__", result.map_rare);
  summary("__nonrare__", result.map_nonrare);
}

}  // namespace nofrills
