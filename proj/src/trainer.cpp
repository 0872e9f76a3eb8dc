#include "nofrills/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace nofrills {

EncodedImage encode_image(const ImageRecord& record, const Taxonomy& taxonomy,
                          const EncodeOptions& options) {
  const CandidateSet cands =
      build_candidates(record, taxonomy, options.candidates);
  const int human_class = taxonomy.require_human_object();
  const std::vector<Candidate>& humans = cands.for_object(human_class);

  EncodedImage out;
  out.image_id = record.image_id;
  for (const Candidate& hc : humans) {
    for (int o = 0; o < taxonomy.n_objects(); ++o) {
      const std::vector<int>& classes = taxonomy.classes_for_object(o);
      if (classes.empty()) continue;
      for (const Candidate& oc : cands.for_object(o)) {
        if (oc.det_index == hc.det_index) continue;
        EncodedPair pair{hc.det_index,
                         oc.det_index,
                         hc.box,
                         oc.box,
                         o,
                         hc.score,
                         oc.score,
                         hc.feature_row,
                         oc.feature_row,
                         {},
                         {},
                         {}};
        const VectorX<double> raw =
            encode_box_pair(hc.box, oc.box, record.width, record.height);
        pair.box_aug =
            augment(raw, o, taxonomy.n_objects()).cast<float>();
        if (options.with_pose) {
          const PoseFeatures pf =
              encode_pose(hc.pose ? &*hc.pose : nullptr, hc.box, oc.box);
          VectorX<double> pose_raw(kPoseRawDim);
          pose_raw << pf.absolute, pf.relative;
          pair.pose_aug =
              augment(pose_raw, o, taxonomy.n_objects()).cast<float>();
        }
        for (const GtPair& gt : record.gt_pairs) {
          const HoiClass& cls = taxonomy.hoi(gt.hoi);
          if (cls.object != o) continue;
          if (iou(hc.box, gt.human_box) > kMatchIouThreshold &&
              iou(oc.box, gt.object_box) > kMatchIouThreshold) {
            if (std::find(pair.matched_classes.begin(),
                          pair.matched_classes.end(),
                          gt.hoi) == pair.matched_classes.end()) {
              pair.matched_classes.push_back(gt.hoi);
            }
          }
        }
        const int pair_idx = static_cast<int>(out.pairs.size());
        for (int h : classes) {
          const bool pos =
              std::find(pair.matched_classes.begin(),
                        pair.matched_classes.end(),
                        h) != pair.matched_classes.end();
          const int sample_idx = static_cast<int>(out.samples.size());
          out.samples.push_back(PairSample{pair_idx, h, pos});
          (pos ? out.positives : out.negatives).push_back(sample_idx);
        }
        out.pairs.push_back(std::move(pair));
      }
    }
  }
  return out;
}

std::vector<EncodedImage> encode_dataset(std::span<const ImageRecord> records,
                                         const Taxonomy& taxonomy,
                                         const EncodeOptions& options) {
  std::vector<EncodedImage> out;
  out.reserve(records.size());
  for (const ImageRecord& r : records) {
    out.push_back(encode_image(r, taxonomy, options));
  }
  return out;
}

std::vector<int> sample_minibatch(const EncodedImage& image, int neg_per_pos,
                                  std::mt19937_64& rng) {
  if (neg_per_pos < 1) {
    throw std::invalid_argument("sample_minibatch: neg_per_pos must be >= 1");
  }
  if (image.positives.empty()) return {};
  std::vector<int> batch = image.positives;
  const long target =
      std::min(static_cast<long>(image.positives.size()) * neg_per_pos,
               static_cast<long>(image.negatives.size()));
  std::vector<int> negs = image.negatives;
  // Partial Fisher-Yates: the first `target` entries are a uniform sample
  // without replacement.
  for (long i = 0; i < target; ++i) {
    std::uniform_int_distribution<long> pick(i,
                                             static_cast<long>(negs.size()) - 1);
    std::swap(negs[static_cast<std::size_t>(i)],
              negs[static_cast<std::size_t>(pick(rng))]);
  }
  batch.insert(batch.end(), negs.begin(), negs.begin() + target);
  return batch;
}

LossBatch<float> build_loss_batch(const EncodedImage& image,
                                  std::span<const int> sample_indices,
                                  const FeatureTensor& features,
                                  const Taxonomy& taxonomy,
                                  const TrainConfig& config) {
  LossBatch<float> batch;
  const Eigen::Index n = static_cast<Eigen::Index>(sample_indices.size());
  batch.n_samples = n;
  batch.inputs.n = n;
  const FactorSet fs = config.factors;
  const int app_dim = features.dim();
  if (fs.human_app) batch.inputs.human_app.resize(n, app_dim);
  if (fs.object_app) batch.inputs.object_app.resize(n, app_dim);
  if (fs.boxes) {
    batch.inputs.boxes.resize(n, box_factor_input_dim(taxonomy.n_objects()));
  }
  if (fs.pose) {
    batch.inputs.pose.resize(n, pose_factor_input_dim(taxonomy.n_objects()));
  }

  for (Eigen::Index r = 0; r < n; ++r) {
    const PairSample& s =
        image.samples[static_cast<std::size_t>(sample_indices[r])];
    const EncodedPair& pair = image.pairs[static_cast<std::size_t>(s.pair)];
    if (fs.human_app) {
      batch.inputs.human_app.row(r) = features.values.row(pair.human_row);
    }
    if (fs.object_app) {
      batch.inputs.object_app.row(r) = features.values.row(pair.object_row);
    }
    if (fs.boxes) batch.inputs.boxes.row(r) = pair.box_aug.transpose();
    if (fs.pose) {
      if (pair.pose_aug.size() == 0) {
        throw std::logic_error(
            "build_loss_batch: pose factor enabled but image was encoded "
            "without pose features");
      }
      batch.inputs.pose.row(r) = pair.pose_aug.transpose();
    }
    const double det_product = pair.det_human * pair.det_object;
    if (config.use_indicators) {
      batch.terms.push_back(
          {r, taxonomy.hoi(s.hoi).interaction,
           s.positive ? 1.0f : 0.0f, det_product});
    } else {
      // Without indicators every sampled pair is scored against every HOI
      // class. The record format carries one detector score per box, so the
      // wrong-class detector probability is approximated by the box's own
      // score.
      for (int h = 0; h < taxonomy.n_classes(); ++h) {
        const bool matched =
            std::find(pair.matched_classes.begin(),
                      pair.matched_classes.end(),
                      h) != pair.matched_classes.end();
        batch.terms.push_back({r, taxonomy.hoi(h).interaction,
                               matched ? 1.0f : 0.0f, det_product});
      }
    }
  }
  return batch;
}

std::vector<PairScore> score_encoded_image(const FactorModel<float>& model,
                                           const EncodedImage& image,
                                           const FeatureTensor& features,
                                           const Taxonomy& taxonomy) {
  std::vector<PairScore> out;
  if (image.pairs.empty()) return out;
  FactorInputs<float> in;
  const Eigen::Index n = static_cast<Eigen::Index>(image.pairs.size());
  in.n = n;
  const FactorSet fs = model.factors();
  if (fs.human_app) in.human_app.resize(n, model.appearance_dim());
  if (fs.object_app) in.object_app.resize(n, model.appearance_dim());
  if (fs.boxes) in.boxes.resize(n, model.box_input_dim());
  if (fs.pose) in.pose.resize(n, model.pose_input_dim());
  for (Eigen::Index r = 0; r < n; ++r) {
    const EncodedPair& p = image.pairs[static_cast<std::size_t>(r)];
    if (fs.human_app) in.human_app.row(r) = features.values.row(p.human_row);
    if (fs.object_app) in.object_app.row(r) = features.values.row(p.object_row);
    if (fs.boxes) in.boxes.row(r) = p.box_aug.transpose();
    if (fs.pose) {
      if (p.pose_aug.size() == 0) {
        throw std::logic_error(
            "score_encoded_image: pose factor enabled but image was encoded "
            "without pose features");
      }
      in.pose.row(r) = p.pose_aug.transpose();
    }
  }
  const MatrixX<float> probs = model.interaction_term_eval(in);
  for (const PairSample& s : image.samples) {
    const EncodedPair& p = image.pairs[static_cast<std::size_t>(s.pair)];
    out.push_back(make_pair_score(
        p.human_det, p.object_det, p.human_box, p.object_box, s.hoi,
        p.det_human, p.det_object,
        static_cast<double>(
            probs(s.pair, taxonomy.hoi(s.hoi).interaction)),
        true, true));
  }
  return out;
}

TrainResult train(std::span<const EncodedImage> train_images,
                  const FeatureTensor& train_features,
                  const std::optional<ValView>& val, const Taxonomy& taxonomy,
                  const TrainConfig& config) {
  TrainResult result;
  result.model = FactorModel<float>::make(taxonomy, config.factors,
                                          config.appearance_dim,
                                          mix_seed(config.seed, 0xF0));
  if (!config.factors.any() || config.epochs == 0) {
    return result;  // nothing trainable: the initialized model is final
  }

  nn::Adam<float> adam(config.adam);
  const auto params = result.model.parameters();
  const auto grads = result.model.gradients();

  std::vector<int> order(train_images.size());
  std::iota(order.begin(), order.end(), 0);

  FactorModel<float> best = result.model;
  double best_map = -1.0;

  auto eval_val = [&](const FactorModel<float>& m) -> EvalResult {
    std::vector<std::vector<PairScore>> scores;
    scores.reserve(val->images.size());
    for (const EncodedImage& img : val->images) {
      scores.push_back(score_encoded_image(m, img, *val->features, taxonomy));
    }
    return evaluate(val->records, scores, taxonomy);
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 shuffle_rng(mix_seed(config.seed, 0xE0, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    long batches = 0;
    for (int idx : order) {
      const EncodedImage& image = train_images[static_cast<std::size_t>(idx)];
      if (image.positives.empty()) continue;
      std::mt19937_64 rng(mix_seed(config.seed, 0xB0 + epoch, idx));
      const std::vector<int> sel =
          sample_minibatch(image, config.neg_per_pos, rng);
      if (sel.size() < 2) continue;  // batch statistics need >= 2 samples
      const LossBatch<float> batch =
          build_loss_batch(image, sel, train_features, taxonomy, config);
      result.model.zero_grad();
      const double loss = minibatch_loss(result.model, batch, config.loss_mode,
                                         taxonomy.n_classes());
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("training diverged (non-finite loss) on image " +
                                   image.image_id,
                               best_map >= 0.0 ? best : result.model,
                               result.metrics);
      }
      try {
        adam.step(params, grads);
      } catch (const std::runtime_error& e) {
        throw TrainingDiverged(std::string("training diverged: ") + e.what(),
                               best_map >= 0.0 ? best : result.model,
                               result.metrics);
      }
      loss_sum += loss;
      ++batches;
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    if (val) {
      const EvalResult ev = eval_val(result.model);
      em.val_map_full = ev.map_full;
      em.val_map_rare = ev.map_rare;
      em.val_map_nonrare = ev.map_nonrare;
      if (ev.map_full && *ev.map_full > best_map) {
        best_map = *ev.map_full;
        best = result.model;
        result.best_epoch = epoch;
      }
    }
    em.wall_seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    result.metrics.push_back(em);
  }

  if (val && best_map >= 0.0) {
    result.model = std::move(best);
  } else {
    result.best_epoch = config.epochs - 1;
  }
  return result;
}

void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const EpochMetrics> metrics) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("metrics: cannot write " + path.string());
  }
  out << "epoch,train_loss,val_map_full,val_map_rare,val_map_nonrare,"
         "wall_seconds\n";
  char buf[256];
  for (const EpochMetrics& m : metrics) {
    auto opt = [](const std::optional<double>& v) {
      if (!v) return std::string("NA");
      char b[64];
      std::snprintf(b, sizeof(b), "%.9g", *v);
      return std::string(b);
    };
    std::snprintf(buf, sizeof(buf), "%d,%.9g,", m.epoch, m.train_loss);
    out << buf << opt(m.val_map_full) << ',' << opt(m.val_map_rare) << ','
        << opt(m.val_map_nonrare) << ',';
    std::snprintf(buf, sizeof(buf), "%.3f", m.wall_seconds);
    out << buf << '\n';
  }
}

}  // namespace nofrills
