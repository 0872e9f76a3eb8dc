#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nofrills/candidates.hpp"
#include "nofrills/dataio.hpp"
#include "nofrills/encoders.hpp"
#include "nofrills/nn.hpp"
#include "nofrills/taxonomy.hpp"
#include "nofrills/types.hpp"

namespace nofrills {

struct FactorSet {
  bool human_app = false;
  bool object_app = false;
  bool boxes = false;
  bool pose = false;

  static FactorSet none() { return {}; }
  static FactorSet all() { return {true, true, true, true}; }

  bool any() const { return human_app || object_app || boxes || pose; }

  std::vector<std::string> to_strings() const {
    std::vector<std::string> out;
    if (human_app) out.push_back("human_app");
    if (object_app) out.push_back("object_app");
    if (boxes) out.push_back("boxes");
    if (pose) out.push_back("pose");
    return out;
  }

  static FactorSet from_strings(const std::vector<std::string>& names) {
    FactorSet fs;
    for (const std::string& n : names) {
      if (n == "human_app") fs.human_app = true;
      else if (n == "object_app") fs.object_app = true;
      else if (n == "boxes") fs.boxes = true;
      else if (n == "pose") fs.pose = true;
      else throw std::invalid_argument("unknown factor '" + n + "'");
    }
    return fs;
  }

  bool operator==(const FactorSet&) const = default;
};

/// Per-factor input matrices for one batch; only the matrices of enabled
/// factors are consulted. `n` is the batch size.
template <typename Scalar>
struct FactorInputs {
  Eigen::Index n = 0;
  MatrixX<Scalar> human_app;
  MatrixX<Scalar> object_app;
  MatrixX<Scalar> boxes;
  MatrixX<Scalar> pose;
};

/// Frozen detector term: candidate-set indicator times detector probability.
inline double detector_term(double score, bool in_candidate_set) {
  return in_candidate_set ? score : 0.0;
}

struct PairScore {
  int human_det;
  int object_det;
  Box human_box;
  Box object_box;
  int hoi;
  double p_det_human;
  double p_det_object;
  double p_interaction;
  double p_final;
};

/// Assembles a PairScore; the indicator gating and the p_final product live
/// here so every scoring path shares one arithmetic route.
inline PairScore make_pair_score(int human_det, int object_det,
                                 const Box& human_box, const Box& object_box,
                                 int hoi, double human_score,
                                 double object_score, double p_interaction,
                                 bool human_in_set, bool object_in_set) {
  const double dh = detector_term(human_score, human_in_set);
  const double dobj = detector_term(object_score, object_in_set);
  return PairScore{human_det, object_det,     human_box,
                   object_box, hoi,           dh,
                   dobj,       p_interaction, dh * dobj * p_interaction};
}

/// Four-factor interaction model. Disabled factors are absent (their term is
/// removed from the logit sum, not zeroed).
template <typename Scalar>
class FactorModel {
 public:
  FactorModel() = default;

  static FactorModel make(const Taxonomy& taxonomy, FactorSet factors,
                          int appearance_dim, std::uint64_t seed) {
    FactorModel m;
    m.factors_ = factors;
    m.n_objects_ = taxonomy.n_objects();
    m.n_interactions_ = taxonomy.n_interactions();
    m.appearance_dim_ = appearance_dim;
    m.box_input_dim_ = box_factor_input_dim(m.n_objects_);
    m.pose_input_dim_ = pose_factor_input_dim(m.n_objects_);
    const int ni = m.n_interactions_;
    if (factors.human_app) {
      m.phi_human_.emplace(appearance_dim, std::vector<int>{appearance_dim},
                           ni, mix_seed(seed, 1), "phi_human");
    }
    if (factors.object_app) {
      m.phi_object_.emplace(appearance_dim, std::vector<int>{appearance_dim},
                            ni, mix_seed(seed, 2), "phi_object");
    }
    if (factors.boxes) {
      m.phi_boxes_.emplace(
          m.box_input_dim_,
          std::vector<int>{m.box_input_dim_, m.box_input_dim_}, ni,
          mix_seed(seed, 3), "phi_boxes");
    }
    if (factors.pose) {
      m.phi_pose_.emplace(
          m.pose_input_dim_,
          std::vector<int>{m.pose_input_dim_, m.pose_input_dim_}, ni,
          mix_seed(seed, 4), "phi_pose");
    }
    return m;
  }

  FactorSet factors() const { return factors_; }
  int n_objects() const { return n_objects_; }
  int n_interactions() const { return n_interactions_; }
  int appearance_dim() const { return appearance_dim_; }
  int box_input_dim() const { return box_input_dim_; }
  int pose_input_dim() const { return pose_input_dim_; }

  std::optional<nn::Mlp<Scalar>>& phi_human() { return phi_human_; }
  std::optional<nn::Mlp<Scalar>>& phi_object() { return phi_object_; }
  std::optional<nn::Mlp<Scalar>>& phi_boxes() { return phi_boxes_; }
  std::optional<nn::Mlp<Scalar>>& phi_pose() { return phi_pose_; }

  /// Sum of enabled factor logits, training mode (caches activations).
  MatrixX<Scalar> interaction_logits_train(const FactorInputs<Scalar>& in) {
    MatrixX<Scalar> logits = MatrixX<Scalar>::Zero(in.n, n_interactions_);
    if (phi_human_) logits += phi_human_->forward_train(checked(in.human_app, in.n, *phi_human_));
    if (phi_object_) logits += phi_object_->forward_train(checked(in.object_app, in.n, *phi_object_));
    if (phi_boxes_) logits += phi_boxes_->forward_train(checked(in.boxes, in.n, *phi_boxes_));
    if (phi_pose_) logits += phi_pose_->forward_train(checked(in.pose, in.n, *phi_pose_));
    return logits;
  }

  MatrixX<Scalar> interaction_logits_eval(const FactorInputs<Scalar>& in) const {
    MatrixX<Scalar> logits = MatrixX<Scalar>::Zero(in.n, n_interactions_);
    if (phi_human_) logits += phi_human_->infer(checked(in.human_app, in.n, *phi_human_));
    if (phi_object_) logits += phi_object_->infer(checked(in.object_app, in.n, *phi_object_));
    if (phi_boxes_) logits += phi_boxes_->infer(checked(in.boxes, in.n, *phi_boxes_));
    if (phi_pose_) logits += phi_pose_->infer(checked(in.pose, in.n, *phi_pose_));
    return logits;
  }

  /// Eq. 3: sigmoid of the summed factor logits; with no factors enabled the
  /// term is the constant 0.5.
  MatrixX<Scalar> interaction_term_eval(const FactorInputs<Scalar>& in) const {
    MatrixX<Scalar> logits = interaction_logits_eval(in);
    return ((-logits.array()).exp() + Scalar(1)).inverse().matrix();
  }

  /// Routes the upstream logit gradient into every enabled factor. The same
  /// matrix flows into each factor since the logits are a plain sum.
  void backward_logits(const Eigen::Ref<const MatrixX<Scalar>>& grad) {
    if (phi_human_) phi_human_->backward(grad);
    if (phi_object_) phi_object_->backward(grad);
    if (phi_boxes_) phi_boxes_->backward(grad);
    if (phi_pose_) phi_pose_->backward(grad);
  }

  void zero_grad() {
    if (phi_human_) phi_human_->zero_grad();
    if (phi_object_) phi_object_->zero_grad();
    if (phi_boxes_) phi_boxes_->zero_grad();
    if (phi_pose_) phi_pose_->zero_grad();
  }

  std::vector<nn::ParamView<Scalar>> parameters() {
    return collect(&nn::Mlp<Scalar>::parameters);
  }
  std::vector<nn::ParamView<Scalar>> gradients() {
    return collect(&nn::Mlp<Scalar>::gradients);
  }
  std::vector<nn::ParamView<Scalar>> state_tensors() {
    return collect(&nn::Mlp<Scalar>::state_tensors);
  }

 private:
  static const MatrixX<Scalar>& checked(const MatrixX<Scalar>& m,
                                        Eigen::Index n,
                                        const nn::Mlp<Scalar>& mlp) {
    if (m.rows() != n || m.cols() != mlp.input_dim()) {
      throw std::invalid_argument(
          mlp.name() + ": feature matrix is " + std::to_string(m.rows()) +
          "x" + std::to_string(m.cols()) + ", expected " + std::to_string(n) +
          "x" + std::to_string(mlp.input_dim()));
    }
    return m;
  }

  template <typename F>
  std::vector<nn::ParamView<Scalar>> collect(F getter) {
    std::vector<nn::ParamView<Scalar>> out;
    for (auto* mlp : {&phi_human_, &phi_object_, &phi_boxes_, &phi_pose_}) {
      if (mlp->has_value()) {
        auto views = ((**mlp).*getter)();
        out.insert(out.end(), views.begin(), views.end());
      }
    }
    return out;
  }

  FactorSet factors_;
  int n_objects_ = 0;
  int n_interactions_ = 0;
  int appearance_dim_ = 0;
  int box_input_dim_ = 0;
  int pose_input_dim_ = 0;
  std::optional<nn::Mlp<Scalar>> phi_human_;
  std::optional<nn::Mlp<Scalar>> phi_object_;
  std::optional<nn::Mlp<Scalar>> phi_boxes_;
  std::optional<nn::Mlp<Scalar>> phi_pose_;
};

/// Builds the factor input matrices for a batch of (human, object) candidate
/// pairs of one image. Appearance rows come from the feature tensor; layout
/// features are encoded on the fly.
template <typename Scalar>
FactorInputs<Scalar> encode_pair_inputs(
    const std::vector<std::pair<const Candidate*, const Candidate*>>& pairs,
    const std::vector<int>& object_classes, const ImageRecord& record,
    const FeatureTensor& features, const FactorModel<Scalar>& model) {
  FactorInputs<Scalar> in;
  in.n = static_cast<Eigen::Index>(pairs.size());
  const FactorSet fs = model.factors();
  if (fs.human_app) in.human_app.resize(in.n, model.appearance_dim());
  if (fs.object_app) in.object_app.resize(in.n, model.appearance_dim());
  if (fs.boxes) in.boxes.resize(in.n, model.box_input_dim());
  if (fs.pose) in.pose.resize(in.n, model.pose_input_dim());
  for (Eigen::Index r = 0; r < in.n; ++r) {
    const Candidate& hc = *pairs[static_cast<std::size_t>(r)].first;
    const Candidate& oc = *pairs[static_cast<std::size_t>(r)].second;
    const int obj = object_classes[static_cast<std::size_t>(r)];
    if (fs.human_app) {
      in.human_app.row(r) =
          features.values.row(hc.feature_row).template cast<Scalar>();
    }
    if (fs.object_app) {
      in.object_app.row(r) =
          features.values.row(oc.feature_row).template cast<Scalar>();
    }
    if (fs.boxes) {
      const VectorX<double> raw =
          encode_box_pair(hc.box, oc.box, record.width, record.height);
      in.boxes.row(r) =
          augment(raw, obj, model.n_objects()).transpose().template cast<Scalar>();
    }
    if (fs.pose) {
      const PoseFeatures pf =
          encode_pose(hc.pose ? &*hc.pose : nullptr, hc.box, oc.box);
      VectorX<double> raw(kPoseRawDim);
      raw << pf.absolute, pf.relative;
      in.pose.row(r) =
          augment(raw, obj, model.n_objects()).transpose().template cast<Scalar>();
    }
  }
  return in;
}

/// Alg. 1 stage 2: scores every candidate pair of an image for every HOI
/// class whose (human, object) candidacy holds. Each distinct pair runs the
/// factor MLPs once; its per-interaction probabilities are shared across all
/// HOI classes touching that pair. Pairs whose boxes are not candidates for a
/// class are never materialized for it.
template <typename Scalar>
std::vector<PairScore> score_image(const FactorModel<Scalar>& model,
                                   const ImageRecord& record,
                                   const CandidateSet& cands,
                                   const FeatureTensor& features,
                                   const Taxonomy& taxonomy) {
  const int human_class = taxonomy.require_human_object();
  const std::vector<Candidate>& humans = cands.for_object(human_class);
  std::vector<PairScore> out;
  if (humans.empty()) return out;

  std::vector<std::pair<const Candidate*, const Candidate*>> pairs;
  std::vector<int> pair_object;
  for (const Candidate& hc : humans) {
    for (int o = 0; o < taxonomy.n_objects(); ++o) {
      if (taxonomy.classes_for_object(o).empty()) continue;
      for (const Candidate& oc : cands.for_object(o)) {
        if (oc.det_index == hc.det_index) continue;  // a box cannot pair with itself
        pairs.push_back({&hc, &oc});
        pair_object.push_back(o);
      }
    }
  }
  if (pairs.empty()) return out;

  const FactorInputs<Scalar> in =
      encode_pair_inputs(pairs, pair_object, record, features, model);
  const MatrixX<Scalar> probs = model.interaction_term_eval(in);

  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const Candidate& hc = *pairs[r].first;
    const Candidate& oc = *pairs[r].second;
    for (int h : taxonomy.classes_for_object(pair_object[r])) {
      const int interaction = taxonomy.hoi(h).interaction;
      out.push_back(make_pair_score(
          hc.det_index, oc.det_index, hc.box, oc.box, h, hc.score, oc.score,
          static_cast<double>(probs(static_cast<Eigen::Index>(r), interaction)),
          /*human_in_set=*/true, /*object_in_set=*/true));
    }
  }
  return out;
}

}  // namespace nofrills
