// Copyright 2026 The qsfe Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsfe/errors.hpp"
#include "qsfe/qnn.hpp"

namespace qsfe {

enum class Task { regression, classification };

inline const char* to_string(Task task) {
    return task == Task::regression ? "regression" : "classification";
}

template <typename Scalar = double>
struct AffineLayer {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> weight; // out x in
    Eigen::Vector<Scalar, Eigen::Dynamic> bias;

    Eigen::Vector<Scalar, Eigen::Dynamic>
    apply(const Eigen::Vector<Scalar, Eigen::Dynamic>& x) const {
        return weight * x + bias;
    }

    static AffineLayer identity(Eigen::Index n) {
        AffineLayer layer;
        layer.weight =
            Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n);
        layer.bias = Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(n);
        return layer;
    }
};

template <typename Scalar>
Scalar logistic(Scalar v) {
    return Scalar(1) / (Scalar(1) + std::exp(-v));
}

/// Classical affine -> angle clamp -> QNN -> classical affine, with a
/// logistic output squashing in classification mode.
///
/// The clamp maps the unbounded pre-layer output through pi * logistic(u)
/// so encoding angles stay inside one period. Pure-QNN mode uses an
/// identity pre layer over already-scaled features and disables the clamp.
template <typename Scalar = double>
struct HybridModel {
    AffineLayer<Scalar> pre; // n_features -> n_qubits
    QnnModel<Scalar> qnn;
    AffineLayer<Scalar> post; // 1 -> 1
    Task task = Task::regression;
    bool angle_clamp = true;

    void validate() const {
        qnn.validate();
        if (pre.weight.rows() != qnn.feature_map.n_qubits ||
            pre.bias.size() != qnn.feature_map.n_qubits) {
            throw ShapeError("HybridModel: pre layer must emit one value per qubit");
        }
        if (post.weight.rows() != 1 || post.weight.cols() != 1 ||
            post.bias.size() != 1) {
            throw ShapeError("HybridModel: post layer must be 1 -> 1");
        }
    }
};

using HybridModeld = HybridModel<double>;

struct TrainConfig {
    enum class Optimizer { adam, sgd };

    int epochs = 200;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    bool freeze_pre = false;
    bool freeze_qnn = false;
    bool freeze_post = false;

    void validate() const {
        if (epochs < 1) {
            throw ConfigError("TrainConfig: epochs must be at least 1");
        }
        if (!(learning_rate > 0)) {
            throw ConfigError("TrainConfig: learning rate must be positive");
        }
    }
};

/// Min-max map of regression targets onto [-1, 1], the range of the QNN
/// observable. Predictions are unscaled before reporting.
template <typename Scalar = double>
struct TargetScaler {
    Scalar t_min = 0;
    Scalar t_max = 1;

    template <typename Derived>
    static TargetScaler fit(const Eigen::MatrixBase<Derived>& t) {
        if (t.size() == 0) {
            throw ConfigError("TargetScaler: empty target vector");
        }
        TargetScaler s;
        s.t_min = t.minCoeff();
        s.t_max = t.maxCoeff();
        if (!(s.t_max > s.t_min)) {
            throw ConfigError("TargetScaler: zero target variance");
        }
        return s;
    }

    Scalar scale(Scalar t) const {
        return Scalar(2) * (t - t_min) / (t_max - t_min) - Scalar(1);
    }
    Scalar unscale(Scalar z) const {
        return (z + Scalar(1)) / Scalar(2) * (t_max - t_min) + t_min;
    }
};

namespace detail {

template <typename Scalar>
struct HybridTrace {
    Eigen::Vector<Scalar, Eigen::Dynamic> pre_out;  // u
    Eigen::Vector<Scalar, Eigen::Dynamic> angles;   // a = clamp(u)
    Scalar qnn_out = 0;                             // q
    Scalar post_out = 0;                            // z
    Scalar prediction = 0;                          // z or logistic(z)
};

template <typename Scalar>
HybridTrace<Scalar> hybrid_trace(const Eigen::Vector<Scalar, Eigen::Dynamic>& x,
                                 const HybridModel<Scalar>& model) {
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    if (x.size() != model.pre.weight.cols()) {
        throw ShapeError("hybrid_forward: feature vector of length " +
                         std::to_string(x.size()) + ", pre layer expects " +
                         std::to_string(model.pre.weight.cols()));
    }
    HybridTrace<Scalar> trace;
    trace.pre_out = model.pre.apply(x);
    if (model.angle_clamp) {
        trace.angles = trace.pre_out.unaryExpr(
            [pi](Scalar v) { return pi * logistic(v); });
    } else {
        trace.angles = trace.pre_out;
    }
    trace.qnn_out = qnn_forward(trace.angles, model.qnn);
    trace.post_out =
        model.post.weight(0, 0) * trace.qnn_out + model.post.bias[0];
    trace.prediction = model.task == Task::classification
                           ? logistic(trace.post_out)
                           : trace.post_out;
    return trace;
}

} // namespace detail

/// Model-space prediction: the raw post-affine value for regression, the
/// logistic probability for classification.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Scalar hybrid_forward(const Eigen::MatrixBase<Derived>& x,
                      const HybridModel<Scalar>& model) {
    model.validate();
    const Eigen::Vector<Scalar, Eigen::Dynamic> x_eval = x;
    return detail::hybrid_trace(x_eval, model).prediction;
}

/// Classification label with the 0.5 probability threshold (0.5 maps to 1).
template <typename Derived, typename Scalar = typename Derived::Scalar>
int hybrid_classify(const Eigen::MatrixBase<Derived>& x,
                    const HybridModel<Scalar>& model) {
    return hybrid_forward(x, model) >= Scalar(0.5) ? 1 : 0;
}

template <typename Scalar = double>
struct HybridGradients {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> pre_weight;
    Eigen::Vector<Scalar, Eigen::Dynamic> pre_bias;
    Eigen::Vector<Scalar, Eigen::Dynamic> theta;
    Scalar post_weight = 0;
    Scalar post_bias = 0;
    Scalar loss = 0;
};

/// Full-batch loss and analytic gradients via the chain rule through the
/// parameter-shift QNN derivatives. Targets live in model space: scaled
/// values in [-1, 1] for regression, {0, 1} labels for classification
/// (loss: mean squared error / binary cross-entropy).
template <typename DerivedX, typename DerivedT,
          typename Scalar = typename DerivedX::Scalar>
HybridGradients<Scalar>
hybrid_backward(const Eigen::MatrixBase<DerivedX>& X_in,
                const Eigen::MatrixBase<DerivedT>& targets_in,
                const HybridModel<Scalar>& model) {
    model.validate();
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> X = X_in;
    const Eigen::Vector<Scalar, Eigen::Dynamic> targets = targets_in;
    if (X.rows() == 0) {
        throw ConfigError("hybrid_backward: empty batch");
    }
    if (targets.size() != X.rows()) {
        throw ShapeError("hybrid_backward: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(X.rows()) +
                         " samples");
    }
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    const Scalar inv_m = Scalar(1) / Scalar(X.rows());

    HybridGradients<Scalar> grads;
    grads.pre_weight = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(
        model.pre.weight.rows(), model.pre.weight.cols());
    grads.pre_bias =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(model.pre.bias.size());
    grads.theta =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(model.qnn.weights.size());

    for (Eigen::Index s = 0; s < X.rows(); ++s) {
        const Eigen::Vector<Scalar, Eigen::Dynamic> x = X.row(s).transpose();
        const auto trace = detail::hybrid_trace(x, model);
        const Scalar t = targets[s];

        Scalar dz;
        if (model.task == Task::classification) {
            const Scalar p =
                std::clamp(trace.prediction, Scalar(1e-12), Scalar(1) - Scalar(1e-12));
            grads.loss += -(t * std::log(p) + (Scalar(1) - t) * std::log(Scalar(1) - p)) * inv_m;
            dz = (trace.prediction - t) * inv_m;
        } else {
            const Scalar r = trace.post_out - t;
            grads.loss += r * r * inv_m;
            dz = Scalar(2) * r * inv_m;
        }

        grads.post_weight += dz * trace.qnn_out;
        grads.post_bias += dz;
        const Scalar dq = dz * model.post.weight(0, 0);

        grads.theta += dq * grad_weights(trace.angles, model.qnn);

        Eigen::Vector<Scalar, Eigen::Dynamic> da =
            dq * grad_inputs(trace.angles, model.qnn);
        Eigen::Vector<Scalar, Eigen::Dynamic> du;
        if (model.angle_clamp) {
            du = da;
            for (Eigen::Index k = 0; k < du.size(); ++k) {
                const Scalar sig = logistic(trace.pre_out[k]);
                du[k] *= pi * sig * (Scalar(1) - sig);
            }
        } else {
            du = da;
        }
        grads.pre_weight.noalias() += du * x.transpose();
        grads.pre_bias += du;
    }
    return grads;
}

namespace detail {

template <typename Scalar>
Eigen::Index hybrid_param_count(const HybridModel<Scalar>& model) {
    return model.pre.weight.size() + model.pre.bias.size() +
           model.qnn.weights.size() + 2;
}

// Flat parameter order: pre weight (column-major), pre bias, theta,
// post weight, post bias.
template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic>
pack_params(const HybridModel<Scalar>& model) {
    Eigen::Vector<Scalar, Eigen::Dynamic> flat(hybrid_param_count(model));
    Eigen::Index at = 0;
    flat.segment(at, model.pre.weight.size()) =
        Eigen::Map<const Eigen::Vector<Scalar, Eigen::Dynamic>>(
            model.pre.weight.data(), model.pre.weight.size());
    at += model.pre.weight.size();
    flat.segment(at, model.pre.bias.size()) = model.pre.bias;
    at += model.pre.bias.size();
    flat.segment(at, model.qnn.weights.size()) = model.qnn.weights;
    at += model.qnn.weights.size();
    flat[at++] = model.post.weight(0, 0);
    flat[at++] = model.post.bias[0];
    return flat;
}

template <typename Scalar>
void unpack_params(const Eigen::Vector<Scalar, Eigen::Dynamic>& flat,
                   HybridModel<Scalar>& model) {
    Eigen::Index at = 0;
    Eigen::Map<Eigen::Vector<Scalar, Eigen::Dynamic>>(
        model.pre.weight.data(), model.pre.weight.size()) =
        flat.segment(at, model.pre.weight.size());
    at += model.pre.weight.size();
    model.pre.bias = flat.segment(at, model.pre.bias.size());
    at += model.pre.bias.size();
    model.qnn.weights = flat.segment(at, model.qnn.weights.size());
    at += model.qnn.weights.size();
    model.post.weight(0, 0) = flat[at++];
    model.post.bias[0] = flat[at++];
}

template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic>
pack_gradients(const HybridGradients<Scalar>& grads,
               const HybridModel<Scalar>& model, const TrainConfig& config) {
    Eigen::Vector<Scalar, Eigen::Dynamic> flat(hybrid_param_count(model));
    Eigen::Index at = 0;
    const auto put = [&flat, &at](const auto& block, bool frozen) {
        const Eigen::Index size = block.size();
        if (frozen) {
            flat.segment(at, size).setZero();
        } else {
            flat.segment(at, size) =
                Eigen::Map<const Eigen::Vector<Scalar, Eigen::Dynamic>>(
                    block.data(), size);
        }
        at += size;
    };
    put(grads.pre_weight, config.freeze_pre);
    put(grads.pre_bias, config.freeze_pre);
    put(grads.theta, config.freeze_qnn);
    flat[at++] = config.freeze_post ? Scalar(0) : grads.post_weight;
    flat[at++] = config.freeze_post ? Scalar(0) : grads.post_bias;
    return flat;
}

} // namespace detail

/// Full-batch gradient descent with the configured optimizer. Deterministic
/// for a fixed seed and configuration; aborts with the failing epoch if the
/// loss stops being finite.
template <typename DerivedX, typename DerivedT,
          typename Scalar = typename DerivedX::Scalar>
std::vector<Scalar>
train_hybrid(const Eigen::MatrixBase<DerivedX>& X_in,
             const Eigen::MatrixBase<DerivedT>& targets_in,
             HybridModel<Scalar>& model, const TrainConfig& config) {
    config.validate();
    model.validate();
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> X = X_in;
    const Eigen::Vector<Scalar, Eigen::Dynamic> targets = targets_in;
    if (X.rows() == 0) {
        throw ConfigError("train_hybrid: empty training set");
    }
    using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;
    Vector params = detail::pack_params(model);
    Vector adam_m = Vector::Zero(params.size());
    Vector adam_v = Vector::Zero(params.size());
    std::vector<Scalar> history;
    history.reserve(static_cast<std::size_t>(config.epochs));

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto grads = hybrid_backward(X, targets, model);
        if (!std::isfinite(grads.loss)) {
            throw TrainingError("train_hybrid: non-finite loss at epoch " +
                                std::to_string(epoch));
        }
        history.push_back(grads.loss);

        const Vector g = detail::pack_gradients(grads, model, config);
        if (config.optimizer == TrainConfig::Optimizer::adam) {
            const Scalar b1 = static_cast<Scalar>(config.beta1);
            const Scalar b2 = static_cast<Scalar>(config.beta2);
            adam_m = b1 * adam_m + (Scalar(1) - b1) * g;
            adam_v = b2 * adam_v + (Scalar(1) - b2) * g.cwiseProduct(g);
            const Scalar bc1 = Scalar(1) - std::pow(b1, Scalar(epoch));
            const Scalar bc2 = Scalar(1) - std::pow(b2, Scalar(epoch));
            for (Eigen::Index k = 0; k < params.size(); ++k) {
                const Scalar m_hat = adam_m[k] / bc1;
                const Scalar v_hat = adam_v[k] / bc2;
                params[k] -= static_cast<Scalar>(config.learning_rate) * m_hat /
                             (std::sqrt(v_hat) +
                              static_cast<Scalar>(config.adam_epsilon));
            }
        } else {
            params -= static_cast<Scalar>(config.learning_rate) * g;
        }
        detail::unpack_params(params, model);
    }
    return history;
}

} // namespace qsfe
