#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nofrills/types.hpp"

namespace nofrills::nn {

/// Flat view over one parameter tensor; `data` aliases the tensor's storage.
template <typename Scalar>
struct ParamView {
  std::string name;
  Scalar* data;
  Eigen::Index size;
};

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] inside the BCE;
/// the gradient is zero where the clamp is active.
inline constexpr double kProbClamp = 1e-7;

/// One binary cross-entropy term: loss and d(loss)/d(prob).
inline std::pair<double, double> bce_term(double label, double prob) {
  if (!std::isfinite(prob)) {
    return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  }
  const double p = std::min(1.0 - kProbClamp, std::max(kProbClamp, prob));
  const double loss =
      -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
  double grad = 0.0;
  if (prob > kProbClamp && prob < 1.0 - kProbClamp) {
    grad = (p - label) / (p * (1.0 - p));
  }
  return {loss, grad};
}

/// Mean BCE over a batch plus the gradient w.r.t. each input probability.
template <typename Scalar>
std::pair<double, VectorX<Scalar>> bce_mean(const VectorX<Scalar>& probs,
                                            const VectorX<Scalar>& labels) {
  if (probs.size() != labels.size()) {
    throw std::invalid_argument("bce_mean: probs/labels size mismatch");
  }
  const Eigen::Index n = probs.size();
  VectorX<Scalar> grad = VectorX<Scalar>::Zero(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [loss, g] = bce_term(static_cast<double>(labels[i]),
                              static_cast<double>(probs[i]));
    total += loss;
    grad[i] = static_cast<Scalar>(g / static_cast<double>(n));
  }
  return {n > 0 ? total / static_cast<double>(n) : 0.0, grad};
}

template <typename Scalar>
struct Affine {
  MatrixX<Scalar> weight;   // in x out
  RowVectorX<Scalar> bias;  // out
  MatrixX<Scalar> grad_weight;
  RowVectorX<Scalar> grad_bias;
  MatrixX<Scalar> cached_input;

  Affine() = default;

  Affine(int in_dim, int out_dim, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / (in_dim + out_dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    weight.resize(in_dim, out_dim);
    for (Eigen::Index j = 0; j < weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < weight.rows(); ++i) {
        weight(i, j) = static_cast<Scalar>(dist(rng));
      }
    }
    bias = RowVectorX<Scalar>::Zero(out_dim);
    grad_weight = MatrixX<Scalar>::Zero(in_dim, out_dim);
    grad_bias = RowVectorX<Scalar>::Zero(out_dim);
  }

  MatrixX<Scalar> apply(const Eigen::Ref<const MatrixX<Scalar>>& x) const {
    if (x.cols() != weight.rows()) {
      throw std::invalid_argument(
          "affine: input width " + std::to_string(x.cols()) +
          " does not match weight rows " + std::to_string(weight.rows()));
    }
    MatrixX<Scalar> y = x * weight;
    y.rowwise() += bias;
    return y;
  }

  MatrixX<Scalar> forward_train(const Eigen::Ref<const MatrixX<Scalar>>& x) {
    cached_input = x;
    return apply(x);
  }

  MatrixX<Scalar> backward(const Eigen::Ref<const MatrixX<Scalar>>& grad_out) {
    if (cached_input.rows() != grad_out.rows()) {
      throw std::logic_error("affine: backward without cached forward");
    }
    grad_weight.noalias() += cached_input.transpose() * grad_out;
    grad_bias += grad_out.colwise().sum();
    return grad_out * weight.transpose();
  }
};

template <typename Scalar>
struct BatchNorm {
  RowVectorX<Scalar> gamma, beta, running_mean, running_var;
  RowVectorX<Scalar> grad_gamma, grad_beta;
  Scalar momentum = Scalar(0.1);
  Scalar eps = Scalar(1e-5);

  // caches (training forward only)
  MatrixX<Scalar> xhat;
  RowVectorX<Scalar> inv_std;

  BatchNorm() = default;

  explicit BatchNorm(int dim)
      : gamma(RowVectorX<Scalar>::Ones(dim)),
        beta(RowVectorX<Scalar>::Zero(dim)),
        running_mean(RowVectorX<Scalar>::Zero(dim)),
        running_var(RowVectorX<Scalar>::Ones(dim)),
        grad_gamma(RowVectorX<Scalar>::Zero(dim)),
        grad_beta(RowVectorX<Scalar>::Zero(dim)) {}

  MatrixX<Scalar> forward_train(const Eigen::Ref<const MatrixX<Scalar>>& x) {
    const Eigen::Index n = x.rows();
    // Batch statistics accumulated in double for stable sums.
    const Eigen::RowVectorXd mean = x.template cast<double>().colwise().mean();
    const Eigen::MatrixXd centered =
        x.template cast<double>().rowwise() - mean;
    const Eigen::RowVectorXd var_biased =
        centered.array().square().colwise().mean().matrix();
    const Eigen::RowVectorXd istd =
        (var_biased.array() + static_cast<double>(eps)).rsqrt().matrix();
    inv_std = istd.cast<Scalar>();
    xhat = (centered.array().rowwise() * istd.array())
               .matrix()
               .cast<Scalar>();
    MatrixX<Scalar> y = xhat;
    y.array().rowwise() *= gamma.array();
    y.array().rowwise() += beta.array();

    const double m = static_cast<double>(momentum);
    const Eigen::RowVectorXd var_unbiased =
        var_biased * (static_cast<double>(n) /
                      std::max<double>(1.0, static_cast<double>(n - 1)));
    const Eigen::RowVectorXd new_mean =
        (1.0 - m) * running_mean.template cast<double>() + m * mean;
    const Eigen::RowVectorXd new_var =
        (1.0 - m) * running_var.template cast<double>() + m * var_unbiased;
    running_mean = new_mean.cast<Scalar>();
    running_var = new_var.cast<Scalar>();
    return y;
  }

  MatrixX<Scalar> apply_eval(const Eigen::Ref<const MatrixX<Scalar>>& x) const {
    const RowVectorX<Scalar> istd =
        (running_var.array() + eps).rsqrt().matrix();
    MatrixX<Scalar> y = x.rowwise() - running_mean;
    y.array().rowwise() *= istd.array();
    y.array().rowwise() *= gamma.array();
    y.array().rowwise() += beta.array();
    return y;
  }

  MatrixX<Scalar> backward(const Eigen::Ref<const MatrixX<Scalar>>& grad_out) {
    if (xhat.rows() != grad_out.rows()) {
      throw std::logic_error("batchnorm: backward without cached forward");
    }
    const Scalar n = static_cast<Scalar>(grad_out.rows());
    grad_gamma += (grad_out.array() * xhat.array()).colwise().sum().matrix();
    grad_beta += grad_out.colwise().sum();

    // dx = inv_std/N * (N*dxhat - sum(dxhat) - xhat * sum(dxhat*xhat))
    using ArrayXX = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    ArrayXX dxhat = grad_out.array().rowwise() * gamma.array();
    const Eigen::Array<Scalar, 1, Eigen::Dynamic> sum_dxhat =
        dxhat.colwise().sum();
    const Eigen::Array<Scalar, 1, Eigen::Dynamic> sum_dxhat_xhat =
        (dxhat * xhat.array()).colwise().sum();
    ArrayXX dx = n * dxhat;
    dx.rowwise() -= sum_dxhat;
    dx -= xhat.array().rowwise() * sum_dxhat_xhat;
    dx.rowwise() *= inv_std.array() / n;
    return dx.matrix();
  }
};

/// MLP: per hidden layer affine -> batchnorm -> ReLU; final affine emits raw
/// logits. Training-mode forward uses batch statistics, caches activations
/// for backward and updates running statistics; infer() uses running
/// statistics and is a deterministic per-sample function.
template <typename Scalar>
class Mlp {
 public:
  Mlp() = default;

  Mlp(int input_dim, const std::vector<int>& hidden_dims, int output_dim,
      std::uint64_t seed, std::string name = "mlp")
      : name_(std::move(name)),
        input_dim_(input_dim),
        output_dim_(output_dim) {
    std::mt19937_64 rng(seed);
    int prev = input_dim;
    for (int h : hidden_dims) {
      Hidden layer;
      layer.affine = Affine<Scalar>(prev, h, rng);
      layer.bn = BatchNorm<Scalar>(h);
      hidden_.push_back(std::move(layer));
      prev = h;
    }
    output_ = Affine<Scalar>(prev, output_dim, rng);
  }

  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  const std::string& name() const { return name_; }
  int n_hidden() const { return static_cast<int>(hidden_.size()); }

  MatrixX<Scalar> forward_train(const Eigen::Ref<const MatrixX<Scalar>>& x) {
    if (x.rows() < 2) {
      throw std::invalid_argument(
          name_ + ": training-mode forward requires a batch of at least 2 "
                  "samples (batch statistics undefined)");
    }
    MatrixX<Scalar> a = x;
    for (Hidden& layer : hidden_) {
      MatrixX<Scalar> z = layer.affine.forward_train(a);
      z = layer.bn.forward_train(z);
      layer.relu_mask = (z.array() > Scalar(0)).template cast<Scalar>().matrix();
      a = z.cwiseMax(Scalar(0));
    }
    return output_.forward_train(a);
  }

  /// Evaluation-mode forward; does not touch caches or running statistics.
  MatrixX<Scalar> infer(const Eigen::Ref<const MatrixX<Scalar>>& x) const {
    MatrixX<Scalar> a = x;
    for (const Hidden& layer : hidden_) {
      MatrixX<Scalar> z = layer.affine.apply(a);
      z = layer.bn.apply_eval(z);
      a = z.cwiseMax(Scalar(0));
    }
    return output_.apply(a);
  }

  /// Accumulates parameter gradients for the cached training batch; returns
  /// the gradient w.r.t. the input.
  MatrixX<Scalar> backward(const Eigen::Ref<const MatrixX<Scalar>>& grad_out) {
    MatrixX<Scalar> g = output_.backward(grad_out);
    for (auto it = hidden_.rbegin(); it != hidden_.rend(); ++it) {
      g.array() *= it->relu_mask.array();
      g = it->bn.backward(g);
      g = it->affine.backward(g);
    }
    return g;
  }

  void zero_grad() {
    for (Hidden& layer : hidden_) {
      layer.affine.grad_weight.setZero();
      layer.affine.grad_bias.setZero();
      layer.bn.grad_gamma.setZero();
      layer.bn.grad_beta.setZero();
    }
    output_.grad_weight.setZero();
    output_.grad_bias.setZero();
  }

  std::vector<ParamView<Scalar>> parameters() {
    std::vector<ParamView<Scalar>> out;
    for (std::size_t i = 0; i < hidden_.size(); ++i) {
      Hidden& l = hidden_[i];
      const std::string p = name_ + ".hidden" + std::to_string(i);
      out.push_back(
          {p + ".weight", l.affine.weight.data(), l.affine.weight.size()});
      out.push_back({p + ".bias", l.affine.bias.data(), l.affine.bias.size()});
      out.push_back({p + ".bn_gamma", l.bn.gamma.data(), l.bn.gamma.size()});
      out.push_back({p + ".bn_beta", l.bn.beta.data(), l.bn.beta.size()});
    }
    out.push_back(
        {name_ + ".out.weight", output_.weight.data(), output_.weight.size()});
    out.push_back(
        {name_ + ".out.bias", output_.bias.data(), output_.bias.size()});
    return out;
  }

  std::vector<ParamView<Scalar>> gradients() {
    std::vector<ParamView<Scalar>> out;
    for (std::size_t i = 0; i < hidden_.size(); ++i) {
      Hidden& l = hidden_[i];
      const std::string p = name_ + ".hidden" + std::to_string(i);
      out.push_back({p + ".weight", l.affine.grad_weight.data(),
                     l.affine.grad_weight.size()});
      out.push_back({p + ".bias", l.affine.grad_bias.data(),
                     l.affine.grad_bias.size()});
      out.push_back(
          {p + ".bn_gamma", l.bn.grad_gamma.data(), l.bn.grad_gamma.size()});
      out.push_back(
          {p + ".bn_beta", l.bn.grad_beta.data(), l.bn.grad_beta.size()});
    }
    out.push_back({name_ + ".out.weight", output_.grad_weight.data(),
                   output_.grad_weight.size()});
    out.push_back({name_ + ".out.bias", output_.grad_bias.data(),
                   output_.grad_bias.size()});
    return out;
  }

  /// Parameters plus batchnorm running statistics, in canonical checkpoint
  /// order.
  std::vector<ParamView<Scalar>> state_tensors() {
    std::vector<ParamView<Scalar>> out = parameters();
    for (std::size_t i = 0; i < hidden_.size(); ++i) {
      Hidden& l = hidden_[i];
      const std::string p = name_ + ".hidden" + std::to_string(i);
      out.push_back({p + ".bn_running_mean", l.bn.running_mean.data(),
                     l.bn.running_mean.size()});
      out.push_back({p + ".bn_running_var", l.bn.running_var.data(),
                     l.bn.running_var.size()});
    }
    return out;
  }

 private:
  struct Hidden {
    Affine<Scalar> affine;
    BatchNorm<Scalar> bn;
    MatrixX<Scalar> relu_mask;
  };

  std::string name_;
  int input_dim_ = 0;
  int output_dim_ = 0;
  std::vector<Hidden> hidden_;
  Affine<Scalar> output_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with per-tensor moment buffers kept in double.
template <typename Scalar>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }

  void step(const std::vector<ParamView<Scalar>>& params,
            const std::vector<ParamView<Scalar>>& grads) {
    if (params.size() != grads.size()) {
      throw std::invalid_argument("adam: params/grads tensor count mismatch");
    }
    if (m_.empty()) {
      for (const ParamView<Scalar>& p : params) {
        m_.push_back(Eigen::VectorXd::Zero(p.size));
        v_.push_back(Eigen::VectorXd::Zero(p.size));
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const ParamView<Scalar>& p = params[i];
      const ParamView<Scalar>& g = grads[i];
      if (p.size != g.size || p.size != m_[i].size()) {
        throw std::invalid_argument("adam: tensor shape changed for " + p.name);
      }
      for (Eigen::Index j = 0; j < p.size; ++j) {
        const double gj = static_cast<double>(g.data[j]);
        if (!std::isfinite(gj)) {
          throw std::runtime_error(
              "adam: non-finite gradient for parameter '" + g.name + "'");
        }
        m_[i][j] = config_.beta1 * m_[i][j] + (1.0 - config_.beta1) * gj;
        v_[i][j] = config_.beta2 * v_[i][j] + (1.0 - config_.beta2) * gj * gj;
        const double mhat = m_[i][j] / bc1;
        const double vhat = v_[i][j] / bc2;
        p.data[j] = static_cast<Scalar>(
            static_cast<double>(p.data[j]) -
            config_.learning_rate * mhat / (std::sqrt(vhat) + config_.eps));
      }
    }
  }

 private:
  AdamConfig config_;
  long t_ = 0;
  std::vector<Eigen::VectorXd> m_, v_;
};

}  // namespace nofrills::nn
