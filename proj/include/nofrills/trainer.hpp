#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nofrills/candidates.hpp"
#include "nofrills/dataio.hpp"
#include "nofrills/evaluator.hpp"
#include "nofrills/factor_model.hpp"
#include "nofrills/nn.hpp"
#include "nofrills/taxonomy.hpp"

namespace nofrills {

enum class LossMode { kHoi, kInteraction };

struct TrainConfig {
  FactorSet factors;
  int neg_per_pos = 1000;
  LossMode loss_mode = LossMode::kHoi;
  bool use_indicators = true;
  int epochs = 30;
  nn::AdamConfig adam;
  std::uint64_t seed = 0;
  int appearance_dim = 0;  // resolved from the feature tensor
};

/// One training sample: a candidate pair together with one HOI class the pair
/// is a candidate for. A pair that is a candidate for k classes yields k
/// samples.
struct PairSample {
  int pair;
  int hoi;
  bool positive;
};

struct EncodedPair {
  int human_det;
  int object_det;
  Box human_box;
  Box object_box;
  int object_class;
  double det_human;   // frozen detector scores; optimization constants
  double det_object;
  int human_row;
  int object_row;
  VectorX<float> box_aug;
  VectorX<float> pose_aug;          // empty unless encoded with pose
  std::vector<int> matched_classes;  // HOI classes matched under the IoU rule
};

struct EncodedImage {
  std::string image_id;
  std::vector<EncodedPair> pairs;
  std::vector<PairSample> samples;
  std::vector<int> positives;  // indices into samples
  std::vector<int> negatives;
};

struct EncodeOptions {
  bool with_pose = false;
  CandidateParams candidates;
};

/// Builds candidate pairs, assigns the IoU(>0.5)-both-boxes labels against
/// the image's GT pairs, and encodes the layout features once per pair.
EncodedImage encode_image(const ImageRecord& record, const Taxonomy& taxonomy,
                          const EncodeOptions& options = {});

std::vector<EncodedImage> encode_dataset(std::span<const ImageRecord> records,
                                         const Taxonomy& taxonomy,
                                         const EncodeOptions& options = {});

/// All positive samples plus min(P * neg_per_pos, available) negatives drawn
/// uniformly without replacement. Returns indices into image.samples;
/// positives first. Empty when the image has no positives.
std::vector<int> sample_minibatch(const EncodedImage& image, int neg_per_pos,
                                  std::mt19937_64& rng);

/// One mini-batch ready for the loss: per-factor input rows (one row per
/// sample) and the BCE terms of Eq. 4. With indicators each sample
/// contributes one term for its assigned class; without indicators it
/// contributes a term for every HOI class, labeled by the match set.
template <typename Scalar>
struct LossBatch {
  FactorInputs<Scalar> inputs;
  struct Term {
    Eigen::Index row;
    int interaction;
    float label;
    double det_product;
  };
  std::vector<Term> terms;
  Eigen::Index n_samples = 0;
};

LossBatch<float> build_loss_batch(const EncodedImage& image,
                                  std::span<const int> sample_indices,
                                  const FeatureTensor& features,
                                  const Taxonomy& taxonomy,
                                  const TrainConfig& config);

/// Eq. 4 mini-batch loss; accumulates gradients into the model (training-mode
/// forward, so batchnorm uses batch statistics). Detector scores enter as
/// constants: gradients flow only into the factor MLPs. In interaction mode
/// the BCE reads the interaction term alone and the detector scalars are
/// ignored entirely.
template <typename Scalar>
double minibatch_loss(FactorModel<Scalar>& model, const LossBatch<Scalar>& batch,
                      LossMode mode, int n_hoi_classes,
                      bool accumulate_grads = true) {
  if (batch.n_samples <= 0) {
    throw std::invalid_argument("minibatch_loss: empty batch");
  }
  MatrixX<Scalar> logits = model.interaction_logits_train(batch.inputs);
  MatrixX<Scalar> grad = MatrixX<Scalar>::Zero(logits.rows(), logits.cols());
  const double norm = 1.0 / (static_cast<double>(batch.n_samples) *
                             static_cast<double>(n_hoi_classes));
  double loss = 0.0;
  for (const auto& term : batch.terms) {
    const double z = static_cast<double>(logits(term.row, term.interaction));
    const double s = 1.0 / (1.0 + std::exp(-z));
    const double d = mode == LossMode::kHoi ? term.det_product : 1.0;
    const double p = d * s;
    const auto [l, dldp] = nn::bce_term(term.label, p);
    loss += l * norm;
    const double dldz = dldp * d * s * (1.0 - s) * norm;
    grad(term.row, term.interaction) += static_cast<Scalar>(dldz);
  }
  if (accumulate_grads) {
    model.backward_logits(grad);
  }
  return loss;
}

/// Scores the pairs of an encoded image with an evaluation-mode model,
/// emitting one PairScore per (pair, candidate class) sample.
std::vector<PairScore> score_encoded_image(const FactorModel<float>& model,
                                           const EncodedImage& image,
                                           const FeatureTensor& features,
                                           const Taxonomy& taxonomy);

struct EpochMetrics {
  int epoch;
  double train_loss;
  std::optional<double> val_map_full;
  std::optional<double> val_map_rare;
  std::optional<double> val_map_nonrare;
  double wall_seconds;
};

struct TrainResult {
  FactorModel<float> model;  // best validation-mAP model (last when no val)
  std::vector<EpochMetrics> metrics;
  int best_epoch = -1;
};

/// Raised when the loss or a gradient turns non-finite; carries the last
/// finite model so callers can retain a checkpoint.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& msg, FactorModel<float> model,
                   std::vector<EpochMetrics> metrics)
      : std::runtime_error(msg),
        last_model(std::move(model)),
        metrics(std::move(metrics)) {}

  FactorModel<float> last_model;
  std::vector<EpochMetrics> metrics;
};

/// Validation view used for per-epoch mAP: encoded images aligned with their
/// source records (for GT access).
struct ValView {
  std::span<const EncodedImage> images;
  std::span<const ImageRecord> records;
  const FeatureTensor* features = nullptr;
};

/// Epoch loop over single-image mini-batches (Eq. 4), one optimizer step per
/// image; images without positives are skipped. Deterministic for a fixed
/// seed at worker count 1.
TrainResult train(std::span<const EncodedImage> train_images,
                  const FeatureTensor& train_features,
                  const std::optional<ValView>& val, const Taxonomy& taxonomy,
                  const TrainConfig& config);

void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const EpochMetrics> metrics);

}  // namespace nofrills
