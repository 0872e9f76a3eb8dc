#include "nofrills/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace nofrills {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double uniform(std::mt19937_64& rng, ParamRange r) {
  return uniform(rng, r.lo, r.hi);
}

double gauss(std::mt19937_64& rng, double sigma) {
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Weighted class draw via cumulative weights (stable across stdlibs).
int draw_class(std::mt19937_64& rng, const std::vector<double>& cumulative) {
  const double u = uniform(rng, 0.0, cumulative.back());
  const auto it =
      std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(
      it - cumulative.begin(),
      static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

Box clamp_box_into(const Box& b, double width, double height) {
  double x1 = b.x1, y1 = b.y1, x2 = b.x2, y2 = b.y2;
  if (x1 < 0.0) { x2 -= x1; x1 = 0.0; }
  if (y1 < 0.0) { y2 -= y1; y1 = 0.0; }
  if (x2 > width) { x1 -= (x2 - width); x2 = width; }
  if (y2 > height) { y1 -= (y2 - height); y2 = height; }
  x1 = std::max(0.0, x1);
  y1 = std::max(0.0, y1);
  x2 = std::min(width, std::max(x2, x1 + 1.0));
  y2 = std::min(height, std::max(y2, y1 + 1.0));
  return Box(x1, y1, x2, y2);
}

Box jitter_box(const Box& b, double sigma, double width, double height,
               std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double x1 = std::clamp(b.x1 + gauss(rng, sigma), 0.0, width);
    const double y1 = std::clamp(b.y1 + gauss(rng, sigma), 0.0, height);
    const double x2 = std::clamp(b.x2 + gauss(rng, sigma), 0.0, width);
    const double y2 = std::clamp(b.y2 + gauss(rng, sigma), 0.0, height);
    if (x2 > x1 + 1.0 && y2 > y1 + 1.0) return Box(x1, y1, x2, y2);
  }
  return b;
}

}  // namespace

const LayoutRule& layout_rule(int archetype) {
  // 0 ride, 1 sit, 2 hold, 3 fly, 4 watch, 5 carry.
  static const LayoutRule kRules[kNumArchetypes] = {
      // ride: human straddles the top of a similar-width object
      {{1.00, 1.30}, {0.45, 0.60}, {-0.15, 0.15}, {0.25, 0.40},
       false, false, 0.2, {0.52, 0.62}, {0.46, 0.58}},
      // sit: wide object under the human
      {{1.45, 2.10}, {0.43, 0.55}, {-0.25, 0.25}, {0.28, 0.42},
       false, false, -1.0, {0.52, 0.62}, {0.46, 0.58}},
      // hold: object centered on the hand keypoint
      {{0.85, 1.05}, {0.43, 0.52}, {-0.34, -0.10}, {-0.10, 0.10},
       false, true, -1.0, {0.52, 0.62}, {0.46, 0.58}},
      // fly: object well above a smaller human, disjoint
      {{0.95, 1.30}, {0.50, 0.62}, {-0.50, 0.50}, {-1.30, -1.05},
       false, false, -1.0, {0.42, 0.48}, {0.54, 0.62}},
      // watch: object displaced horizontally, disjoint
      {{0.85, 1.10}, {0.43, 0.55}, {1.25, 1.60}, {-0.25, 0.25},
       true, false, -1.0, {0.52, 0.62}, {0.46, 0.58}},
      // carry: object over the lower half of the human
      {{0.86, 1.00}, {0.43, 0.52}, {-0.18, 0.18}, {0.42, 0.58},
       false, false, -1.0, {0.52, 0.62}, {0.46, 0.58}},
  };
  if (archetype < 0 || archetype >= kNumArchetypes) {
    throw std::out_of_range("layout_rule: archetype out of range");
  }
  return kRules[archetype];
}

Eigen::Matrix<double, PoseSkeleton::kNumKeypoints, 2> pose_template(
    int interaction) {
  Eigen::Matrix<double, PoseSkeleton::kNumKeypoints, 2> t;
  // Base stick figure in unit-box coordinates (x right, y down):
  // nose, neck, r-shoulder, r-elbow, r-wrist, l-shoulder, l-elbow, l-wrist,
  // r-hip, r-knee, r-ankle, l-hip, l-knee, l-ankle, r-eye, l-eye, r-ear, l-ear
  t << 0.50, 0.08, 0.50, 0.18, 0.36, 0.20, 0.31, 0.35, 0.28, 0.50,
       0.64, 0.20, 0.69, 0.35, 0.72, 0.50, 0.42, 0.52, 0.41, 0.73,
       0.40, 0.94, 0.58, 0.52, 0.59, 0.73, 0.60, 0.94, 0.46, 0.05,
       0.54, 0.05, 0.42, 0.07, 0.58, 0.07;
  switch (interaction % kNumArchetypes) {
    case 0:  // ride: legs spread
      t(9, 0) -= 0.12; t(10, 0) -= 0.14;
      t(12, 0) += 0.12; t(13, 0) += 0.14;
      break;
    case 1:  // sit: legs folded forward
      t(9, 1) = 0.66; t(10, 1) = 0.80;
      t(12, 1) = 0.66; t(13, 1) = 0.80;
      break;
    case 2:  // hold: right arm raised toward the object
      t(3, 0) = 0.30; t(3, 1) = 0.38;
      t(4, 0) = 0.26; t(4, 1) = 0.46;
      break;
    case 3:  // fly: both arms overhead
      t(3, 0) = 0.38; t(3, 1) = 0.15;
      t(4, 0) = 0.40; t(4, 1) = 0.02;
      t(6, 0) = 0.62; t(6, 1) = 0.15;
      t(7, 0) = 0.60; t(7, 1) = 0.02;
      break;
    case 4:  // watch: neutral stance
      break;
    case 5:  // carry: both wrists at the waist
      t(3, 0) = 0.38; t(3, 1) = 0.42;
      t(4, 0) = 0.44; t(4, 1) = 0.52;
      t(6, 0) = 0.62; t(6, 1) = 0.42;
      t(7, 0) = 0.56; t(7, 1) = 0.52;
      break;
    default:
      break;
  }
  return t;
}

Taxonomy default_synthetic_taxonomy() {
  const std::vector<std::string> objects = {"person", "horse", "bench", "cup",
                                            "kite"};
  const std::vector<std::string> interactions = {"ride", "sit_on", "hold",
                                                 "fly", "watch", "carry"};
  // (object, interaction) pairs; the last two classes are the designated
  // rare ones under the default generator weights.
  const std::vector<HoiClass> classes = {
      {1, 0},  // horse ride
      {1, 4},  // horse watch
      {1, 5},  // horse carry
      {2, 1},  // bench sit_on
      {2, 4},  // bench watch
      {3, 2},  // cup hold
      {3, 5},  // cup carry
      {4, 3},  // kite fly
      {4, 4},  // kite watch
      {3, 4},  // cup watch
      {2, 5},  // bench carry (rare)
      {4, 2},  // kite hold (rare)
  };
  return Taxonomy(objects, interactions, classes,
                  std::vector<long>(classes.size(), 0));
}

namespace {

struct GeneratorState {
  const SyntheticConfig* config;
  const Taxonomy* taxonomy;
  const SyntheticLatents* latents;
  std::vector<double> cumulative_weights;
  int human_class;
};

void append_feature_row(std::vector<float>& storage,
                        const Eigen::Ref<const Eigen::RowVectorXf>& proto,
                        double sigma, std::mt19937_64& rng) {
  for (Eigen::Index i = 0; i < proto.size(); ++i) {
    storage.push_back(proto[i] + static_cast<float>(gauss(rng, sigma)));
  }
}

ImageRecord generate_scene(const GeneratorState& state,
                           const std::string& image_id,
                           std::vector<float>& feature_storage,
                           int& feature_rows, std::vector<long>* class_counts,
                           std::mt19937_64& rng) {
  const SyntheticConfig& cfg = *state.config;
  const Taxonomy& tax = *state.taxonomy;
  const SyntheticLatents& lat = *state.latents;

  ImageRecord rec;
  rec.image_id = image_id;
  rec.width = std::floor(uniform(rng, 620.0, 840.0));
  rec.height = std::floor(uniform(rng, 620.0, 840.0));
  const double S = std::min(rec.width, rec.height);
  const double jitter_sigma = cfg.corner_noise_frac * S;

  auto emit_detection = [&](const Box& gt, int object_class,
                            const Eigen::Ref<const Eigen::RowVectorXf>& proto,
                            double score_lo, double score_hi) {
    const Box det = jitter_box(gt, jitter_sigma, rec.width, rec.height, rng);
    const double score = uniform(rng, score_lo, score_hi);
    append_feature_row(feature_storage, proto, cfg.appearance_noise, rng);
    rec.detections.push_back(RawDetection{det, object_class, score,
                                          feature_rows});
    ++feature_rows;
  };

  const int n_instances =
      uniform_int(rng, cfg.min_instances, cfg.max_instances);
  std::vector<Box> placed_humans;

  for (int inst = 0; inst < n_instances; ++inst) {
    bool placed = false;
    for (int attempt = 0; attempt < 20 && !placed; ++attempt) {
      const int hoi = draw_class(rng, state.cumulative_weights);
      const HoiClass& cls = tax.hoi(hoi);
      const int archetype = cls.interaction % kNumArchetypes;
      const LayoutRule& rule = layout_rule(archetype);

      double h_h = uniform(rng, rule.human_height) * S;
      double w_h = h_h * uniform(rng, rule.human_aspect);
      double w_o = w_h * uniform(rng, rule.width_ratio);
      double h_o = h_h * uniform(rng, rule.height_ratio);

      double dx_units = uniform(rng, rule.dx);
      if (rule.dx_symmetric && uniform_int(rng, 0, 1) == 0) {
        dx_units = -dx_units;
      }
      double dy_units = uniform(rng, rule.dy);
      const double hand_radius = uniform(rng, 0.0, 0.10);
      const double hand_angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);

      const auto tmpl = pose_template(cls.interaction);
      double delta_x, delta_y;
      if (rule.at_hand) {
        delta_x = (tmpl(kHandKeypoint, 0) - 0.5) * w_h +
                  hand_radius * std::cos(hand_angle) * w_h;
        delta_y = (tmpl(kHandKeypoint, 1) - 0.5) * h_h +
                  hand_radius * std::sin(hand_angle) * w_h;
      } else {
        delta_x = dx_units * w_h;
        delta_y = dy_units * h_h;
      }

      // Extent of the pair around the human center, with padding for
      // keypoint noise.
      const double pad = 0.04 * S;
      double ex1 = std::min(-0.5 * w_h, delta_x - 0.5 * w_o) - pad;
      double ex2 = std::max(0.5 * w_h, delta_x + 0.5 * w_o) + pad;
      double ey1 = std::min(-0.5 * h_h, delta_y - 0.5 * h_o) - pad;
      double ey2 = std::max(0.5 * h_h, delta_y + 0.5 * h_o) + pad;
      const double fit = std::min((rec.width - 4.0) / (ex2 - ex1),
                                  (rec.height - 4.0) / (ey2 - ey1));
      if (fit < 1.0) {
        const double s = 0.98 * fit;
        w_h *= s; h_h *= s; w_o *= s; h_o *= s;
        delta_x *= s; delta_y *= s;
        ex1 *= s; ex2 *= s; ey1 *= s; ey2 *= s;
      }
      const double cx =
          uniform(rng, 2.0 - ex1, rec.width - 2.0 - ex2);
      const double cy =
          uniform(rng, 2.0 - ey1, rec.height - 2.0 - ey2);

      const Box human(cx - 0.5 * w_h, cy - 0.5 * h_h, cx + 0.5 * w_h,
                      cy + 0.5 * h_h);
      bool crowded = false;
      for (const Box& other : placed_humans) {
        if (iou(human, other) > 0.25) {
          crowded = true;
          break;
        }
      }
      if (crowded && attempt < 19) continue;

      // Skeleton from the deformed template plus noise.
      PoseSkeleton skeleton(human);
      const double kp_sigma = cfg.keypoint_noise_frac * h_h;
      for (int k = 0; k < PoseSkeleton::kNumKeypoints; ++k) {
        Keypoint kp;
        kp.x = human.x1 + tmpl(k, 0) * w_h + gauss(rng, kp_sigma);
        kp.y = human.y1 + tmpl(k, 1) * h_h + gauss(rng, kp_sigma);
        kp.x = std::clamp(kp.x, 0.0, rec.width);
        kp.y = std::clamp(kp.y, 0.0, rec.height);
        kp.confidence = uniform(rng, 0.55, 0.98);
        if (uniform(rng, 0.0, 1.0) < cfg.keypoint_dropout_prob) {
          kp.confidence = 0.0;
        }
        skeleton.keypoints[static_cast<std::size_t>(k)] = kp;
      }
      const bool has_skeleton =
          uniform(rng, 0.0, 1.0) >= cfg.missing_skeleton_prob;

      double ocx, ocy;
      if (rule.at_hand) {
        // Object centered on the emitted wrist (template position when the
        // skeleton is missing).
        const double wx =
            has_skeleton
                ? skeleton.keypoints[kHandKeypoint].x
                : human.x1 + tmpl(kHandKeypoint, 0) * w_h;
        const double wy =
            has_skeleton
                ? skeleton.keypoints[kHandKeypoint].y
                : human.y1 + tmpl(kHandKeypoint, 1) * h_h;
        ocx = wx + hand_radius * std::cos(hand_angle) * w_h;
        ocy = wy + hand_radius * std::sin(hand_angle) * w_h;
      } else {
        ocx = cx + delta_x;
        ocy = cy + delta_y;
      }
      Box object = clamp_box_into(
          Box(ocx - 0.5 * w_o, ocy - 0.5 * h_o, ocx + 0.5 * w_o,
              ocy + 0.5 * h_o),
          rec.width, rec.height);

      if (rule.min_iou > 0.0 && !(iou(human, object) > rule.min_iou)) {
        if (attempt < 19) continue;
      }

      placed_humans.push_back(human);
      rec.gt_pairs.push_back(GtPair{human, object, hoi});
      if (class_counts != nullptr) {
        ++(*class_counts)[static_cast<std::size_t>(hoi)];
      }
      if (has_skeleton) rec.poses.push_back(skeleton);

      emit_detection(human, state.human_class,
                     lat.human_proto.row(cls.interaction), cfg.gt_score_lo,
                     cfg.gt_score_hi);
      if (uniform(rng, 0.0, 1.0) < cfg.duplicate_detection_prob) {
        emit_detection(human, state.human_class,
                       lat.human_proto.row(cls.interaction), 0.40, 0.70);
      }
      emit_detection(object, cls.object, lat.object_proto.row(hoi),
                     cfg.gt_score_lo, cfg.gt_score_hi);
      if (uniform(rng, 0.0, 1.0) < cfg.duplicate_detection_prob) {
        emit_detection(object, cls.object, lat.object_proto.row(hoi), 0.40,
                       0.70);
      }
      placed = true;
    }
  }

  for (int d = 0; d < cfg.distractors_per_image; ++d) {
    const double w = uniform(rng, 0.05, 0.30) * S;
    const double h = uniform(rng, 0.05, 0.30) * S;
    const double x1 = uniform(rng, 0.0, rec.width - w);
    const double y1 = uniform(rng, 0.0, rec.height - h);
    const int object_class = uniform_int(rng, 0, tax.n_objects() - 1);
    const Box box(x1, y1, x1 + w, y1 + h);
    const double score =
        uniform(rng, cfg.distractor_score_lo, cfg.distractor_score_hi);
    append_feature_row(feature_storage,
                       lat.distractor_proto.row(object_class),
                       cfg.appearance_noise, rng);
    rec.detections.push_back(
        RawDetection{box, object_class, score, feature_rows});
    ++feature_rows;
  }
  return rec;
}

SyntheticSplit generate_split(const GeneratorState& state, int n_images,
                              const char* prefix, std::uint64_t seed,
                              std::uint64_t split_tag,
                              std::vector<long>* class_counts) {
  SyntheticSplit split;
  std::vector<float> storage;
  int feature_rows = 0;
  for (int i = 0; i < n_images; ++i) {
    std::mt19937_64 rng(mix_seed(seed, split_tag, static_cast<std::uint64_t>(i)));
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%06d", prefix, i);
    split.records.push_back(generate_scene(state, id, storage, feature_rows,
                                           class_counts, rng));
  }
  const int dim = state.config->appearance_dim;
  split.features.values.resize(feature_rows, dim);
  if (feature_rows > 0) {
    std::copy(storage.begin(), storage.end(), split.features.values.data());
  }
  return split;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticConfig& config,
                                    const Taxonomy& base_taxonomy,
                                    std::uint64_t seed) {
  if (config.appearance_dim < 1) {
    throw std::invalid_argument("generate_synthetic: appearance_dim must be "
                                "positive");
  }
  if (config.min_instances < 1 || config.max_instances < config.min_instances) {
    throw std::invalid_argument("generate_synthetic: bad instance range");
  }
  if (config.train_images < 0 || config.val_images < 0 ||
      config.test_images < 0) {
    throw std::invalid_argument("generate_synthetic: negative image count");
  }
  if (base_taxonomy.n_interactions() < 1 || base_taxonomy.n_classes() < 1) {
    throw std::invalid_argument(
        "generate_synthetic: taxonomy must define at least one interaction "
        "and one hoi class");
  }
  if (config.designated_rare_classes < 0 ||
      config.designated_rare_classes > base_taxonomy.n_classes()) {
    throw std::invalid_argument(
        "generate_synthetic: taxonomy smaller than the designated rare-class "
        "count");
  }

  SyntheticDataset out{{}, {}, {}, {}, base_taxonomy};
  const int human_class = base_taxonomy.require_human_object();

  std::mt19937_64 latent_rng(mix_seed(seed, 0xA11Au));
  auto fill_proto = [&](RowMatrixX<float>& m, int rows, int cols) {
    m.resize(rows, cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m(r, c) = static_cast<float>(gauss(latent_rng, 1.0));
      }
    }
  };
  fill_proto(out.latents.human_proto, base_taxonomy.n_interactions(),
             config.appearance_dim);
  fill_proto(out.latents.object_proto, base_taxonomy.n_classes(),
             config.appearance_dim);
  fill_proto(out.latents.distractor_proto, base_taxonomy.n_objects(),
             config.appearance_dim);
  out.latents.appearance_noise = config.appearance_noise;

  // Class sampling weights: uniform, except the designated rare classes
  // (the last K) whose weight targets rare_target_train_count expected
  // training instances.
  const int n_classes = base_taxonomy.n_classes();
  const int n_rare = config.designated_rare_classes;
  const double expected_instances =
      static_cast<double>(config.train_images) *
      0.5 * (config.min_instances + config.max_instances);
  double rare_weight = 0.1;
  if (n_rare > 0 && expected_instances > 0.0) {
    const double target = config.rare_target_train_count;
    const double denom = expected_instances - target * n_rare;
    if (denom > 0.0) {
      rare_weight = target * (n_classes - n_rare) / denom;
    }
  }
  GeneratorState state;
  state.config = &config;
  state.taxonomy = &base_taxonomy;
  state.latents = &out.latents;
  state.human_class = human_class;
  double acc = 0.0;
  for (int h = 0; h < n_classes; ++h) {
    acc += h >= n_classes - n_rare ? rare_weight : 1.0;
    state.cumulative_weights.push_back(acc);
  }

  std::vector<long> counts(static_cast<std::size_t>(n_classes), 0);
  out.train = generate_split(state, config.train_images, "train", seed, 1,
                             &counts);
  out.val = generate_split(state, config.val_images, "val", seed, 2, nullptr);
  out.test = generate_split(state, config.test_images, "test", seed, 3,
                            nullptr);
  out.taxonomy = base_taxonomy.with_train_counts(counts);
  return out;
}

namespace {

double range_residual(double v, ParamRange r) {
  const double width = std::max(1e-9, r.hi - r.lo);
  if (v < r.lo) return (r.lo - v) / width;
  if (v > r.hi) return (v - r.hi) / width;
  return 0.0;
}

double layout_residual_sq(const LayoutRule& rule, int interaction,
                          const Box& human, const Box& object,
                          const std::optional<PoseSkeleton>& pose) {
  const double w_h = human.width();
  const double h_h = human.height();
  double r2 = 0.0;
  const double wr = object.width() / w_h;
  const double hr = object.height() / h_h;
  r2 += std::pow(range_residual(wr, rule.width_ratio), 2);
  r2 += std::pow(range_residual(hr, rule.height_ratio), 2);
  if (rule.at_hand) {
    double wx, wy;
    if (pose) {
      wx = pose->keypoints[kHandKeypoint].x;
      wy = pose->keypoints[kHandKeypoint].y;
    } else {
      const auto tmpl = pose_template(interaction);
      wx = human.x1 + tmpl(kHandKeypoint, 0) * w_h;
      wy = human.y1 + tmpl(kHandKeypoint, 1) * h_h;
    }
    const double dist = std::hypot(object.center_x() - wx,
                                   object.center_y() - wy) / w_h;
    if (dist > 0.15) r2 += std::pow((dist - 0.15) / 0.15, 2);
  } else {
    double dxu = (object.center_x() - human.center_x()) / w_h;
    if (rule.dx_symmetric) dxu = std::abs(dxu);
    const double dyu = (object.center_y() - human.center_y()) / h_h;
    r2 += std::pow(range_residual(dxu, rule.dx), 2);
    r2 += std::pow(range_residual(dyu, rule.dy), 2);
  }
  if (rule.min_iou > 0.0) {
    const double v = iou(human, object);
    if (v < rule.min_iou) r2 += std::pow((rule.min_iou - v) / rule.min_iou, 2);
  }
  return r2;
}

}  // namespace

std::vector<PairScore> oracle_score_image(const SyntheticLatents& latents,
                                          const Taxonomy& taxonomy,
                                          const ImageRecord& record,
                                          const CandidateSet& candidates,
                                          const FeatureTensor& features) {
  const int human_class = taxonomy.require_human_object();
  const std::vector<Candidate>& humans = candidates.for_object(human_class);
  const double dim = static_cast<double>(features.dim());
  const double sigma2 = latents.appearance_noise * latents.appearance_noise;
  const double app_scale = 2.0 * dim * sigma2;

  std::vector<PairScore> out;
  for (const Candidate& hc : humans) {
    for (int o = 0; o < taxonomy.n_objects(); ++o) {
      for (const Candidate& oc : candidates.for_object(o)) {
        if (oc.det_index == hc.det_index) continue;
        for (int h : taxonomy.classes_for_object(o)) {
          const HoiClass& cls = taxonomy.hoi(h);
          const double dh2 =
              (features.values.row(hc.feature_row) -
               latents.human_proto.row(cls.interaction))
                  .squaredNorm();
          const double do2 = (features.values.row(oc.feature_row) -
                              latents.object_proto.row(h))
                                 .squaredNorm();
          const LayoutRule& rule =
              layout_rule(cls.interaction % kNumArchetypes);
          const double r2 = layout_residual_sq(rule, cls.interaction, hc.box,
                                               oc.box, hc.pose);
          const double p_int = std::max(
              1e-12, std::exp(-(dh2 + do2) / app_scale) * std::exp(-10.0 * r2));
          out.push_back(make_pair_score(hc.det_index, oc.det_index, hc.box,
                                        oc.box, h, hc.score, oc.score, p_int,
                                        true, true));
        }
      }
    }
  }
  return out;
}

void write_synthetic_dataset(const std::filesystem::path& out_dir,
                             const SyntheticDataset& dataset) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  dataset.taxonomy.save(out_dir / "taxonomy.json");
  const std::pair<const char*, const SyntheticSplit*> splits[] = {
      {"train", &dataset.train}, {"val", &dataset.val}, {"test", &dataset.test}};
  for (const auto& [name, split] : splits) {
    fs::create_directories(out_dir / name);
    save_records(out_dir / name / "records.jsonl", split->records);
    save_feature_tensor(out_dir / name / "features.bin", split->features);
  }
}

}  // namespace nofrills
