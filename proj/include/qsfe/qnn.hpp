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

#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsfe/errors.hpp"
#include "qsfe/feature_map.hpp"
#include "qsfe/rng.hpp"
#include "qsfe/statevector.hpp"

namespace qsfe {

/// Layered RY/CX variational circuit: an initial RY layer followed by `reps`
/// blocks of [CX entanglers, RY layer]. Parameter count is
/// n_qubits * (reps + 1).
struct AnsatzSpec {
    int n_qubits = 3;
    int reps = 1;
    EntanglementPattern entanglement = EntanglementPattern::full;

    int param_count() const { return n_qubits * (reps + 1); }

    void validate() const {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw ConfigError("AnsatzSpec: qubit count " +
                              std::to_string(n_qubits) + " outside [1, " +
                              std::to_string(kMaxQubits) + "]");
        }
        if (reps < 1) {
            throw ConfigError("AnsatzSpec: reps must be at least 1, got " +
                              std::to_string(reps));
        }
    }
};

/// Estimator-style model: feature map -> ansatz -> Z-string expectation.
template <typename Scalar = double>
struct QnnModel {
    FeatureMapSpec feature_map;
    AnsatzSpec ansatz;
    Eigen::Vector<Scalar, Eigen::Dynamic> weights;
    PauliZString observable;

    void validate() const {
        feature_map.validate();
        ansatz.validate();
        if (feature_map.n_qubits != ansatz.n_qubits) {
            throw ShapeError("QnnModel: feature map and ansatz qubit counts differ");
        }
        if (weights.size() != ansatz.param_count()) {
            throw ShapeError("QnnModel: " + std::to_string(weights.size()) +
                             " weights for an ansatz with " +
                             std::to_string(ansatz.param_count()) +
                             " parameters");
        }
        if (observable.n_qubits != ansatz.n_qubits) {
            throw ShapeError("QnnModel: observable register size mismatch");
        }
    }
};

using QnnModeld = QnnModel<double>;

/// Seeded uniform weights on [-pi, pi].
template <typename Scalar = double>
Eigen::Vector<Scalar, Eigen::Dynamic> init_weights(const AnsatzSpec& spec,
                                                   std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    Eigen::Vector<Scalar, Eigen::Dynamic> theta(spec.param_count());
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        theta[i] = static_cast<Scalar>(rng.uniform(-pi, pi));
    }
    return theta;
}

/// Applies the ansatz in place. Angle theta[layer * n + q] drives the RY on
/// qubit q in that layer; CX pairs follow the pattern order with the first
/// index as control.
template <typename Scalar, typename Derived>
void ansatz_apply(StateVector<Scalar>& state,
                  const Eigen::MatrixBase<Derived>& theta_in,
                  const AnsatzSpec& spec) {
    spec.validate();
    const Eigen::Vector<Scalar, Eigen::Dynamic> theta = theta_in;
    if (state.n_qubits != spec.n_qubits) {
        throw ShapeError("ansatz_apply: state register size mismatch");
    }
    if (theta.size() != spec.param_count()) {
        throw ShapeError("ansatz_apply: " + std::to_string(theta.size()) +
                         " angles for " + std::to_string(spec.param_count()) +
                         " parameters");
    }
    const int n = spec.n_qubits;
    const auto pairs = entanglement_pairs(n, spec.entanglement);
    for (int q = 0; q < n; ++q) {
        apply_ry(state, q, theta[q]);
    }
    for (int block = 1; block <= spec.reps; ++block) {
        for (const auto& [control, target] : pairs) {
            apply_cx(state, control, target);
        }
        for (int q = 0; q < n; ++q) {
            apply_ry(state, q, theta[block * n + q]);
        }
    }
}

namespace detail {

// Forward pass with explicit per-repetition encoding terms (the gradient
// code shifts one occurrence at a time).
template <typename Scalar>
Scalar qnn_forward_terms(
    std::span<const std::vector<PhaseTerm<Scalar>>> per_rep_terms,
    const QnnModel<Scalar>& model) {
    StateVector<Scalar> state =
        encode_with_terms<Scalar>(per_rep_terms, model.feature_map.n_qubits);
    ansatz_apply(state, model.weights, model.ansatz);
    return expectation_z_string(state, model.observable);
}

} // namespace detail

/// f(x) = <Phi(x)| U(theta)^dag H U(theta) |Phi(x)> in [-1, 1].
template <typename Derived, typename Scalar = typename Derived::Scalar>
Scalar qnn_forward(const Eigen::MatrixBase<Derived>& x,
                   const QnnModel<Scalar>& model) {
    model.validate();
    StateVector<Scalar> state = encode(x, model.feature_map);
    ansatz_apply(state, model.weights, model.ansatz);
    return expectation_z_string(state, model.observable);
}

/// Exact gradient d f / d theta by the parameter-shift rule for RY:
/// grad_i = [f(theta + pi/2 e_i) - f(theta - pi/2 e_i)] / 2.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic>
grad_weights(const Eigen::MatrixBase<Derived>& x,
             const QnnModel<Scalar>& model) {
    model.validate();
    constexpr Scalar half_pi = std::numbers::pi_v<Scalar> / Scalar(2);
    const StateVector<Scalar> encoded = encode(x, model.feature_map);
    Eigen::Vector<Scalar, Eigen::Dynamic> theta = model.weights;
    Eigen::Vector<Scalar, Eigen::Dynamic> grad(theta.size());

    auto eval = [&](const Eigen::Vector<Scalar, Eigen::Dynamic>& angles) {
        StateVector<Scalar> state = encoded;
        ansatz_apply(state, angles, model.ansatz);
        return expectation_z_string(state, model.observable);
    };
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const Scalar saved = theta[i];
        theta[i] = saved + half_pi;
        const Scalar plus = eval(theta);
        theta[i] = saved - half_pi;
        const Scalar minus = eval(theta);
        theta[i] = saved;
        grad[i] = (plus - minus) / Scalar(2);
    }
    return grad;
}

/// Exact gradient d f / d x through the encoding angles.
///
/// Each diagonal term exp(i a Z...Z) has a generator with eigenvalues +-1,
/// so f is a frequency-2 trigonometric polynomial in a and the shift rule
/// reads d f / d a = f(a + pi/4) - f(a - pi/4). Every repetition contributes
/// one occurrence of each angle; occurrences are shifted one at a time and
/// the chain rule through phi_single (derivative 1) and phi_pair
/// (d/dx_i = -(pi - x_j)) accumulates the feature gradient.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic>
grad_inputs(const Eigen::MatrixBase<Derived>& x_in,
            const QnnModel<Scalar>& model) {
    model.validate();
    const Eigen::Vector<Scalar, Eigen::Dynamic> x = x_in;
    if (x.size() != model.feature_map.n_qubits) {
        throw ShapeError("grad_inputs: feature vector of length " +
                         std::to_string(x.size()) + " for " +
                         std::to_string(model.feature_map.n_qubits) +
                         " qubits");
    }
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    constexpr Scalar quarter_pi = pi / Scalar(4);
    const int n = model.feature_map.n_qubits;
    const int reps = model.feature_map.reps;
    const auto pairs = entanglement_pairs(n, model.feature_map.pattern);
    const auto base_terms = encoding_terms(x, pairs);
    std::vector<std::vector<PhaseTerm<Scalar>>> per_rep(
        static_cast<std::size_t>(reps), base_terms);

    Eigen::Vector<Scalar, Eigen::Dynamic> grad =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(n);
    for (int rep = 0; rep < reps; ++rep) {
        auto& terms = per_rep[static_cast<std::size_t>(rep)];
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const Scalar saved = terms[t].angle;
            terms[t].angle = saved + quarter_pi;
            const Scalar plus = detail::qnn_forward_terms<Scalar>(per_rep, model);
            terms[t].angle = saved - quarter_pi;
            const Scalar minus = detail::qnn_forward_terms<Scalar>(per_rep, model);
            terms[t].angle = saved;
            const Scalar dangle = plus - minus;

            if (t < static_cast<std::size_t>(n)) {
                grad[static_cast<Eigen::Index>(t)] += dangle; // phi_single' = 1
            } else {
                const auto& [i, j] = pairs[t - static_cast<std::size_t>(n)];
                grad[i] += dangle * -(pi - x[j]);
                grad[j] += dangle * -(pi - x[i]);
            }
        }
    }
    return grad;
}

} // namespace qsfe
