#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "nofrills/factor_model.hpp"
#include "nofrills/taxonomy.hpp"
#include "nofrills/trainer.hpp"

namespace nofrills {

/// Interaction confusion matrix. raw(m, n) is the mean interaction-term
/// probability for interaction m over GT-positive candidate pairs whose GT
/// interaction is n. Cells involving an interaction with zero GT-positive
/// pairs are NaN (its row and its column carry no data).
struct ConfusionResult {
  Eigen::MatrixXd raw;
  std::vector<long> positives_per_interaction;

  /// Row softmax over the finite entries of each row (subtract row max,
  /// exponentiate, normalize); NaN cells stay NaN.
  Eigen::MatrixXd softmaxed() const;
};

ConfusionResult interaction_confusion(const FactorModel<float>& model,
                                      std::span<const EncodedImage> images,
                                      const FeatureTensor& features,
                                      const Taxonomy& taxonomy);

/// Writes the raw and row-softmaxed matrices as two labeled CSV blocks.
void write_confusion_csv(const std::filesystem::path& path,
                         const ConfusionResult& result,
                         const Taxonomy& taxonomy);

}  // namespace nofrills
