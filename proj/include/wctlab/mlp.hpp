// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wctlab/channel.hpp"
#include "wctlab/dataset.hpp"
#include "wctlab/error.hpp"
#include "wctlab/labeling.hpp"
#include "wctlab/random.hpp"

namespace wct {

enum class Activation { kRelu, kTanh };
enum class OptimizerKind { kSgd, kAdam };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);
std::string to_string(OptimizerKind o);
OptimizerKind optimizer_from_string(const std::string& s);

struct TrainConfig {
    int epochs = 30;
    int batch_size = 256;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::kAdam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t init_seed = 1;
    std::array<int, 3> hidden = {512, 256, 128};
    /// Inference-split metrics are computed every this many epochs (and on the last).
    int metrics_every = 1;
    Activation activation = Activation::kRelu;
    /// Fit per-feature standardization on the training split and bake it into the model.
    bool standardize = true;

    void validate() const;
};

/// Fully-connected network with one input layer, three hidden layers and a
/// softmax output head split into one segment per task.
template <typename Scalar>
struct Mlp {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    static constexpr int kLayers = 5;

    std::vector<int> layer_dims;
    std::vector<Matrix> weights;  ///< weights[l]: layer_dims[l+1] x layer_dims[l]
    std::vector<Vector> biases;
    Activation activation = Activation::kRelu;
    LabelScheme scheme = LabelScheme::kSingleTask;
    TaskLayout head;
    /// Input standardization (x - mean) * scale; empty vectors disable it.
    Vector input_mean;
    Vector input_scale;

    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }

    template <typename Other>
    Mlp<Other> cast() const {
        Mlp<Other> out;
        out.layer_dims = layer_dims;
        for (const auto& w : weights) out.weights.push_back(w.template cast<Other>());
        for (const auto& b : biases) out.biases.push_back(b.template cast<Other>());
        out.activation = activation;
        out.scheme = scheme;
        out.head = head;
        out.input_mean = input_mean.template cast<Other>();
        out.input_scale = input_scale.template cast<Other>();
        return out;
    }

    /// Throws ConfigError if shapes do not chain or the head does not match.
    void validate() const {
        if (layer_dims.size() != kLayers) throw ConfigError("an MLP has exactly 5 layers (input, 3 hidden, output)");
        if (weights.size() != kLayers - 1 || biases.size() != kLayers - 1) throw ConfigError("MLP needs 4 weight/bias pairs");
        for (int l = 0; l + 1 < kLayers; ++l) {
            if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l] || biases[l].size() != layer_dims[l + 1])
                throw ConfigError("MLP layer " + std::to_string(l) + " shape does not chain with layer_dims");
        }
        if (head.total_dim() != output_dim()) throw ConfigError("MLP output dim does not match the head layout");
        if (scheme == LabelScheme::kSingleTask && head.tasks.size() != 1)
            throw ConfigError("single-task head must have exactly one segment");
        if (input_mean.size() != input_scale.size() || (input_mean.size() != 0 && input_mean.size() != input_dim()))
            throw ConfigError("input standardization size does not match the input dim");
    }
};

template <typename Scalar>
struct Gradients {
    std::vector<typename Mlp<Scalar>::Matrix> weights;
    std::vector<typename Mlp<Scalar>::Vector> biases;
};

/// Activations of every layer: [0] standardized input, [1..3] hidden, [4] logits.
template <typename Scalar>
struct ForwardPass {
    std::vector<typename Mlp<Scalar>::Matrix> activations;

    const typename Mlp<Scalar>::Matrix& logits() const { return activations.back(); }
};

/// He-uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
template <typename Scalar>
Mlp<Scalar> init_model(int input_dim, const TaskLayout& head, LabelScheme scheme, const TrainConfig& cfg) {
    Mlp<Scalar> m;
    m.layer_dims = {input_dim, cfg.hidden[0], cfg.hidden[1], cfg.hidden[2], head.total_dim()};
    for (int d : m.layer_dims)
        if (d < 1) throw ConfigError("layer dimensions must be >= 1");
    m.activation = cfg.activation;
    m.scheme = scheme;
    m.head = head;
    std::mt19937_64 rng(derive_seed(cfg.init_seed, {tag(Stream::kInit)}));
    for (int l = 0; l + 1 < Mlp<Scalar>::kLayers; ++l) {
        const double limit = std::sqrt(6.0 / m.layer_dims[l]);
        std::uniform_real_distribution<double> uni(-limit, limit);
        typename Mlp<Scalar>::Matrix w(m.layer_dims[l + 1], m.layer_dims[l]);
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(uni(rng));
        m.weights.push_back(std::move(w));
        m.biases.push_back(Mlp<Scalar>::Vector::Zero(m.layer_dims[l + 1]));
    }
    m.validate();
    return m;
}

namespace detail {

template <typename Derived>
void activate(Eigen::MatrixBase<Derived>& z, Activation a) {
    if (a == Activation::kRelu)
        z.derived() = z.derived().cwiseMax(typename Derived::Scalar(0));
    else
        z.derived() = z.derived().array().tanh().matrix();
}

// Multiplies delta in place by the activation derivative, expressed via the activation output.
template <typename Scalar>
void activation_backward(typename Mlp<Scalar>::Matrix& delta, const typename Mlp<Scalar>::Matrix& out, Activation a) {
    if (a == Activation::kRelu)
        delta = (out.array() > Scalar(0)).select(delta, Scalar(0));
    else
        delta.array() *= (Scalar(1) - out.array().square());
}

} // namespace detail

template <typename Scalar>
ForwardPass<Scalar> forward(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& batch) {
    if (batch.rows() != model.input_dim())
        throw ConfigError("input has " + std::to_string(batch.rows()) + " rows, model expects " +
                          std::to_string(model.input_dim()));
    ForwardPass<Scalar> fp;
    fp.activations.reserve(Mlp<Scalar>::kLayers);
    if (model.input_mean.size() != 0)
        fp.activations.push_back(((batch.colwise() - model.input_mean).array().colwise() * model.input_scale.array()).matrix());
    else
        fp.activations.push_back(batch);
    for (int l = 0; l + 1 < Mlp<Scalar>::kLayers; ++l) {
        typename Mlp<Scalar>::Matrix z = model.weights[l] * fp.activations.back();
        z.colwise() += model.biases[l];
        if (l + 2 < Mlp<Scalar>::kLayers) detail::activate(z, model.activation);
        fp.activations.push_back(std::move(z));
    }
    return fp;
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix logits(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& batch) {
    return forward(model, batch).logits();
}

/// Log-sum-exp stabilized softmax applied independently to each head segment.
template <typename Scalar>
typename Mlp<Scalar>::Matrix segment_softmax(const typename Mlp<Scalar>::Matrix& z, const TaskLayout& head) {
    typename Mlp<Scalar>::Matrix p(z.rows(), z.cols());
    const auto offsets = head.offsets();
    for (std::size_t t = 0; t < head.tasks.size(); ++t) {
        const int k = head.tasks[t].k();
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            const auto seg = z.col(j).segment(offsets[t], k);
            const Scalar m = seg.maxCoeff();
            const auto e = (seg.array() - m).exp();
            p.col(j).segment(offsets[t], k) = (e / e.sum()).matrix();
        }
    }
    return p;
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix probabilities(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& batch) {
    return segment_softmax<Scalar>(logits(model, batch), model.head);
}

/// Per-segment argmax (tasks x columns); ties resolve to the lowest index.
template <typename Derived>
Eigen::MatrixXi argmax_segments(const Eigen::MatrixBase<Derived>& z, const TaskLayout& head) {
    Eigen::MatrixXi out(static_cast<Eigen::Index>(head.tasks.size()), z.cols());
    const auto offsets = head.offsets();
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        for (std::size_t t = 0; t < head.tasks.size(); ++t) {
            int best = 0;
            for (int k = 1; k < head.tasks[t].k(); ++k)
                if (z(offsets[t] + k, j) > z(offsets[t] + best, j)) best = k;
            out(static_cast<Eigen::Index>(t), j) = best;
        }
    }
    return out;
}

template <typename Scalar>
Eigen::MatrixXi predict(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& samples) {
    return argmax_segments(logits(model, samples), model.head);
}

template <typename Scalar>
struct LossAndGrad {
    double loss = 0.0;
    Gradients<Scalar> grads;
    typename Mlp<Scalar>::Matrix logits;
};

namespace detail {

// Sum over segments of the batch-mean cross-entropy; writes dL/dz into dz.
template <typename Scalar>
double softmax_cross_entropy(const typename Mlp<Scalar>::Matrix& z, const typename Mlp<Scalar>::Matrix& y,
                             const TaskLayout& head, typename Mlp<Scalar>::Matrix* dz) {
    const auto offsets = head.offsets();
    const double inv_b = 1.0 / static_cast<double>(z.cols());
    if (dz) dz->resize(z.rows(), z.cols());
    double total = 0.0;
    for (std::size_t t = 0; t < head.tasks.size(); ++t) {
        const int k = head.tasks[t].k();
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            const auto seg = z.col(j).segment(offsets[t], k).template cast<double>();
            const auto tgt = y.col(j).segment(offsets[t], k).template cast<double>();
            const double m = seg.maxCoeff();
            const double lse = m + std::log((seg.array() - m).exp().sum());
            total += -(tgt.array() * (seg.array() - lse)).sum();
            if (dz) {
                const Eigen::ArrayXd p = (seg.array() - lse).exp();
                dz->col(j).segment(offsets[t], k) = ((p - tgt.array() * 1.0) * inv_b).matrix().template cast<Scalar>();
            }
        }
    }
    return total * inv_b;
}

} // namespace detail

template <typename Scalar>
double loss(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& batch, const typename Mlp<Scalar>::Matrix& labels) {
    if (labels.rows() != model.output_dim() || labels.cols() != batch.cols())
        throw ConfigError("label matrix shape does not match the model head and batch");
    return detail::softmax_cross_entropy<Scalar>(logits(model, batch), labels, model.head, nullptr);
}

/// Mean cross-entropy (single head) or unweighted sum of per-task mean
/// cross-entropies (multi head), with backpropagated gradients.
template <typename Scalar>
LossAndGrad<Scalar> loss_and_grad(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& batch,
                                  const typename Mlp<Scalar>::Matrix& labels) {
    using Matrix = typename Mlp<Scalar>::Matrix;
    if (labels.rows() != model.output_dim() || labels.cols() != batch.cols())
        throw ConfigError("label matrix shape does not match the model head and batch");
    const ForwardPass<Scalar> fp = forward(model, batch);
    LossAndGrad<Scalar> out;
    Matrix delta;
    out.loss = detail::softmax_cross_entropy<Scalar>(fp.logits(), labels, model.head, &delta);
    out.logits = fp.logits();
    constexpr int n = Mlp<Scalar>::kLayers - 1;
    out.grads.weights.resize(n);
    out.grads.biases.resize(n);
    for (int l = n - 1; l >= 0; --l) {
        out.grads.weights[l].noalias() = delta * fp.activations[l].transpose();
        out.grads.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            Matrix prev = model.weights[l].transpose() * delta;
            detail::activation_backward<Scalar>(prev, fp.activations[l], model.activation);
            delta = std::move(prev);
        }
    }
    return out;
}

/// Checks the label scheme and layout against the model head first.
template <typename Scalar>
LossAndGrad<Scalar> loss_and_grad(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& batch,
                                  const LabelMatrix& labels) {
    if (labels.scheme != model.scheme || !(labels.layout.segment_sizes() == model.head.segment_sizes()))
        throw ConfigError("label scheme " + to_string(labels.scheme) + " does not match the model head (" +
                          to_string(model.scheme) + ")");
    return loss_and_grad(model, batch, typename Mlp<Scalar>::Matrix(labels.e.template cast<Scalar>()));
}

template <typename Scalar>
class Optimizer {
public:
    Optimizer(const Mlp<Scalar>& model, const TrainConfig& cfg) : cfg_(cfg) {
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            mw_.push_back(Mlp<Scalar>::Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
            vw_.push_back(mw_.back());
            mb_.push_back(Mlp<Scalar>::Vector::Zero(model.biases[l].size()));
            vb_.push_back(mb_.back());
        }
    }

    void step(Mlp<Scalar>& model, const Gradients<Scalar>& g) {
        ++t_;
        const auto lr = static_cast<Scalar>(cfg_.learning_rate);
        if (cfg_.optimizer == OptimizerKind::kSgd) {
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                model.weights[l] -= lr * g.weights[l];
                model.biases[l] -= lr * g.biases[l];
            }
            return;
        }
        const auto b1 = static_cast<Scalar>(cfg_.beta1);
        const auto b2 = static_cast<Scalar>(cfg_.beta2);
        const auto eps = static_cast<Scalar>(cfg_.epsilon);
        const auto c1 = static_cast<Scalar>(1.0 - std::pow(cfg_.beta1, t_));
        const auto c2 = static_cast<Scalar>(1.0 - std::pow(cfg_.beta2, t_));
        auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
            m = b1 * m + (Scalar(1) - b1) * grad;
            v.array() = b2 * v.array() + (Scalar(1) - b2) * grad.array().square();
            param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
        };
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            update(model.weights[l], mw_[l], vw_[l], g.weights[l]);
            update(model.biases[l], mb_[l], vb_[l], g.biases[l]);
        }
    }

private:
    TrainConfig cfg_;
    long t_ = 0;
    std::vector<typename Mlp<Scalar>::Matrix> mw_, vw_;
    std::vector<typename Mlp<Scalar>::Vector> mb_, vb_;
};

struct EpochMetrics {
    int epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    bool has_infer = false;
    double infer_loss = 0.0;
    double infer_accuracy = 0.0;
};

using TrainHistory = std::vector<EpochMetrics>;

/// Loss and exact-match accuracy (every task correct) over a sample set, in chunks.
template <typename Scalar>
std::pair<double, double> loss_and_accuracy(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& x,
                                            const typename Mlp<Scalar>::Matrix& y, Eigen::Index chunk = 4096) {
    if (x.cols() == 0) return {0.0, 0.0};
    double loss_sum = 0.0;
    long correct = 0;
    for (Eigen::Index b = 0; b < x.cols(); b += chunk) {
        const Eigen::Index n = std::min(chunk, x.cols() - b);
        const typename Mlp<Scalar>::Matrix z = logits<Scalar>(model, x.middleCols(b, n));
        const typename Mlp<Scalar>::Matrix yb = y.middleCols(b, n);
        loss_sum += detail::softmax_cross_entropy<Scalar>(z, yb, model.head, nullptr) * static_cast<double>(n);
        correct += (argmax_segments(z, model.head).array() == argmax_segments(yb, model.head).array()).colwise().all().count();
    }
    return {loss_sum / static_cast<double>(x.cols()), static_cast<double>(correct) / static_cast<double>(x.cols())};
}

/// Mini-batch training with a seeded per-epoch shuffle. Deterministic for a fixed
/// (config, data). Throws DivergenceError naming the epoch on a non-finite loss.
template <typename Scalar>
TrainHistory train(Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& x_train,
                   const typename Mlp<Scalar>::Matrix& y_train, const typename Mlp<Scalar>::Matrix* x_infer,
                   const typename Mlp<Scalar>::Matrix* y_infer, const TrainConfig& cfg,
                   const std::function<void(const EpochMetrics&)>& on_epoch = {}) {
    using Matrix = typename Mlp<Scalar>::Matrix;
    cfg.validate();
    model.validate();
    if (x_train.rows() != model.input_dim() || y_train.rows() != model.output_dim() || x_train.cols() != y_train.cols())
        throw ConfigError("training data shape does not match the model");
    if (x_train.cols() == 0) throw ConfigError("training set is empty");
    if ((x_infer == nullptr) != (y_infer == nullptr)) throw ConfigError("inference samples and labels must be given together");

    Optimizer<Scalar> opt(model, cfg);
    const Eigen::Index n = x_train.cols();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Matrix xb, yb;
    TrainHistory history;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::mt19937_64 rng(derive_seed(cfg.init_seed, {tag(Stream::kShuffle), static_cast<std::uint64_t>(epoch)}));
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        long correct = 0;
        for (Eigen::Index b = 0; b < n; b += cfg.batch_size) {
            const Eigen::Index m = std::min<Eigen::Index>(cfg.batch_size, n - b);
            xb.resize(x_train.rows(), m);
            yb.resize(y_train.rows(), m);
            for (Eigen::Index i = 0; i < m; ++i) {
                xb.col(i) = x_train.col(order[static_cast<std::size_t>(b + i)]);
                yb.col(i) = y_train.col(order[static_cast<std::size_t>(b + i)]);
            }
            LossAndGrad<Scalar> lg = loss_and_grad(model, xb, yb);
            if (!std::isfinite(lg.loss))
                throw DivergenceError(epoch, "training diverged at epoch " + std::to_string(epoch) + " (loss is not finite)");
            loss_sum += lg.loss * static_cast<double>(m);
            correct += (argmax_segments(lg.logits, model.head).array() == argmax_segments(yb, model.head).array())
                           .colwise()
                           .all()
                           .count();
            opt.step(model, lg.grads);
        }
        EpochMetrics em;
        em.epoch = epoch;
        em.train_loss = loss_sum / static_cast<double>(n);
        em.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
        if (x_infer && (epoch % cfg.metrics_every == 0 || epoch == cfg.epochs)) {
            std::tie(em.infer_loss, em.infer_accuracy) = loss_and_accuracy(model, *x_infer, *y_infer);
            em.has_infer = true;
        }
        history.push_back(em);
        if (on_epoch) on_epoch(em);
    }
    return history;
}

/// A trained float model plus what is needed to use it on raw samples.
struct Checkpoint {
    Mlp<float> model;
    TrainConfig train;
    VectorizationMode mode = VectorizationMode::kRealImag;
    FeatureConvention convention = FeatureConvention::kDistinctNone;
    std::vector<ChannelProfile> profiles;
};

/// WCTMLP01 file; bit-exact round trip.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace wct
