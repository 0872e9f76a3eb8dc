#include "nofrills/confusion.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace nofrills {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Eigen::MatrixXd ConfusionResult::softmaxed() const {
  const Eigen::Index n = raw.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(n, n, kNaN);
  for (Eigen::Index m = 0; m < n; ++m) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < n; ++c) {
      if (std::isfinite(raw(m, c))) mx = std::max(mx, raw(m, c));
    }
    if (!std::isfinite(mx)) continue;
    double sum = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (std::isfinite(raw(m, c))) sum += std::exp(raw(m, c) - mx);
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      if (std::isfinite(raw(m, c))) {
        out(m, c) = std::exp(raw(m, c) - mx) / sum;
      }
    }
  }
  return out;
}

ConfusionResult interaction_confusion(const FactorModel<float>& model,
                                      std::span<const EncodedImage> images,
                                      const FeatureTensor& features,
                                      const Taxonomy& taxonomy) {
  const int ni = taxonomy.n_interactions();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(ni, ni);
  std::vector<long> counts(static_cast<std::size_t>(ni), 0);

  for (const EncodedImage& image : images) {
    // Gather positive samples only; each runs the factor nets once per pair.
    std::vector<std::pair<int, int>> positives;  // (pair, gt interaction)
    std::vector<int> pair_rows(image.pairs.size(), -1);
    std::vector<int> unique_pairs;
    for (int s : image.positives) {
      const PairSample& sample = image.samples[static_cast<std::size_t>(s)];
      if (pair_rows[static_cast<std::size_t>(sample.pair)] < 0) {
        pair_rows[static_cast<std::size_t>(sample.pair)] =
            static_cast<int>(unique_pairs.size());
        unique_pairs.push_back(sample.pair);
      }
      positives.push_back(
          {sample.pair, taxonomy.hoi(sample.hoi).interaction});
    }
    if (positives.empty()) continue;

    FactorInputs<float> in;
    const Eigen::Index n = static_cast<Eigen::Index>(unique_pairs.size());
    in.n = n;
    const FactorSet fs = model.factors();
    if (fs.human_app) in.human_app.resize(n, model.appearance_dim());
    if (fs.object_app) in.object_app.resize(n, model.appearance_dim());
    if (fs.boxes) in.boxes.resize(n, model.box_input_dim());
    if (fs.pose) in.pose.resize(n, model.pose_input_dim());
    for (Eigen::Index r = 0; r < n; ++r) {
      const EncodedPair& p =
          image.pairs[static_cast<std::size_t>(unique_pairs[r])];
      if (fs.human_app) in.human_app.row(r) = features.values.row(p.human_row);
      if (fs.object_app) {
        in.object_app.row(r) = features.values.row(p.object_row);
      }
      if (fs.boxes) in.boxes.row(r) = p.box_aug.transpose();
      if (fs.pose) in.pose.row(r) = p.pose_aug.transpose();
    }
    const MatrixX<float> probs = model.interaction_term_eval(in);
    for (const auto& [pair, gt_interaction] : positives) {
      const int row = pair_rows[static_cast<std::size_t>(pair)];
      sums.col(gt_interaction) += probs.row(row).transpose().cast<double>();
      ++counts[static_cast<std::size_t>(gt_interaction)];
    }
  }

  ConfusionResult result;
  result.positives_per_interaction = counts;
  result.raw = Eigen::MatrixXd::Constant(ni, ni, kNaN);
  for (int m = 0; m < ni; ++m) {
    if (counts[static_cast<std::size_t>(m)] == 0) continue;  // row has no data
    for (int c = 0; c < ni; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;
      result.raw(m, c) =
          sums(m, c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }
  return result;
}

void write_confusion_csv(const std::filesystem::path& path,
                         const ConfusionResult& result,
                         const Taxonomy& taxonomy) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("confusion: cannot write " + path.string());
  }
  auto write_block = [&](const char* name, const Eigen::MatrixXd& m) {
    out << "# " << name << '\n';
    out << "interaction";
    for (const std::string& s : taxonomy.interactions()) out << ',' << s;
    out << '\n';
    char buf[64];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      out << taxonomy.interactions()[static_cast<std::size_t>(r)];
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (std::isfinite(m(r, c))) {
          std::snprintf(buf, sizeof(buf), "%.9g", m(r, c));
          out << ',' << buf;
        } else {
          out << ",NA";
        }
      }
      out << '\n';
    }
  };
  write_block("raw", result.raw);
  write_block("softmax", result.softmaxed());
}

}  // namespace nofrills
