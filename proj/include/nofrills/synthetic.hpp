#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nofrills/candidates.hpp"
#include "nofrills/dataio.hpp"
#include "nofrills/factor_model.hpp"
#include "nofrills/taxonomy.hpp"
#include "nofrills/types.hpp"

namespace nofrills {

struct SyntheticConfig {
  int train_images = 0;
  int val_images = 0;
  int test_images = 0;
  int appearance_dim = 32;
  int min_instances = 1;
  int max_instances = 3;
  int distractors_per_image = 5;   // uniform boxes, low scores
  double corner_noise_frac = 0.02; // detector jitter sigma, fraction of min(W,H)
  double gt_score_lo = 0.70;
  double gt_score_hi = 0.99;
  double distractor_score_lo = 0.01;
  double distractor_score_hi = 0.40;
  double duplicate_detection_prob = 0.25;
  double appearance_noise = 0.45;  // per-coordinate sigma around prototypes
  double keypoint_noise_frac = 0.02;  // fraction of human box height
  double keypoint_dropout_prob = 0.06;
  double missing_skeleton_prob = 0.05;
  int designated_rare_classes = 2;        // last K classes get low weight
  double rare_target_train_count = 5.0;   // expected train instances per rare class
};

/// Latent generative state: appearance prototypes per interaction (human
/// boxes), per HOI class (object boxes) and per object (distractors). The
/// layout rules and pose templates are fixed tables shared with the oracle.
struct SyntheticLatents {
  RowMatrixX<float> human_proto;       // |I| x D
  RowMatrixX<float> object_proto;      // |H| x D
  RowMatrixX<float> distractor_proto;  // |O| x D
  double appearance_noise = 0.45;
};

struct SyntheticSplit {
  std::vector<ImageRecord> records;
  FeatureTensor features;
};

struct SyntheticDataset {
  SyntheticSplit train;
  SyntheticSplit val;
  SyntheticSplit test;
  SyntheticLatents latents;
  Taxonomy taxonomy;  // train_counts filled from the generated train split
};

/// Interval used by the layout rules.
struct ParamRange {
  double lo;
  double hi;
};

/// Geometric placement rule for one interaction archetype. Offsets are in
/// human-box units (dx in widths, dy in heights, y growing downward); sizes
/// are ratios against the human box.
struct LayoutRule {
  ParamRange width_ratio;   // w_o / w_h
  ParamRange height_ratio;  // h_o / h_h
  ParamRange dx;            // (cx_o - cx_h) / w_h
  ParamRange dy;            // (cy_o - cy_h) / h_h
  bool dx_symmetric = false;   // sample the dx sign uniformly (watch-like)
  bool at_hand = false;        // object centered on the wrist keypoint (hold-like)
  double min_iou = -1.0;       // required overlap (ride-like), -1 disables
  ParamRange human_height;     // h_h as fraction of min(W, H)
  ParamRange human_aspect;     // w_h / h_h
};

inline constexpr int kNumArchetypes = 6;
inline constexpr int kHandKeypoint = 4;  // right wrist in the 18-keypoint layout

/// Archetype table: 0 ride, 1 sit, 2 hold, 3 fly, 4 watch, 5 carry.
/// Interaction i uses archetype i % 6.
const LayoutRule& layout_rule(int archetype);

/// Template keypoint positions (unit human box) for an interaction,
/// including the per-archetype deformation.
Eigen::Matrix<double, PoseSkeleton::kNumKeypoints, 2> pose_template(
    int interaction);

/// Desk-scale default taxonomy: 5 objects (person + 4), 6 interactions,
/// 12 HOI classes.
Taxonomy default_synthetic_taxonomy();

/// Deterministic synthetic dataset: pure function of (config, base taxonomy,
/// seed). Scenes sample GT pairs from interaction-dependent layout rules;
/// detector outputs are corner-jittered GT boxes plus uniform distractors;
/// appearance rows come from per-(object, interaction) Gaussian prototypes;
/// skeletons follow per-interaction keypoint templates.
SyntheticDataset generate_synthetic(const SyntheticConfig& config,
                                    const Taxonomy& base_taxonomy,
                                    std::uint64_t seed);

/// Scores candidate pairs using the generator's own latent rules (appearance
/// prototype distances plus layout-rule residuals). This is the Bayes-style
/// reference used to verify that the generated signals support mAP >= 0.95.
std::vector<PairScore> oracle_score_image(const SyntheticLatents& latents,
                                          const Taxonomy& taxonomy,
                                          const ImageRecord& record,
                                          const CandidateSet& candidates,
                                          const FeatureTensor& features);

/// Writes taxonomy.json plus <split>/records.jsonl and <split>/features.bin.
void write_synthetic_dataset(const std::filesystem::path& out_dir,
                             const SyntheticDataset& dataset);

}  // namespace nofrills
